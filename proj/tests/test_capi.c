/* Exercises the shared library through the public C header only. */
#include <stdio.h>
#include <string.h>

#include "rotdiv/rotdiv.h"

static int failures = 0;

#define EXPECT(cond)                                                 \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

static void test_rotation_handles(void) {
  rotdiv_rotation* a = NULL;
  rotdiv_rotation* b = NULL;
  double angles[8];
  double again[8];
  size_t m = 0;
  EXPECT(rotdiv_rotation_random(8, 11, &a) == ROTDIV_OK);
  EXPECT(rotdiv_rotation_angles(a, angles, 8, &m) == ROTDIV_OK);
  EXPECT(m == 8);
  EXPECT(rotdiv_rotation_from_angles(angles, 8, &b) == ROTDIV_OK);
  EXPECT(rotdiv_rotation_angles(b, again, 4, &m) == ROTDIV_OK);
  EXPECT(m == 8);
  EXPECT(memcmp(angles, again, 4 * sizeof(double)) == 0);
  rotdiv_rotation_free(a);
  rotdiv_rotation_free(b);

  angles[0] = 7.0; /* outside [0, 2 pi) */
  b = NULL;
  EXPECT(rotdiv_rotation_from_angles(angles, 8, &b) == ROTDIV_E_INPUT);
  EXPECT(b == NULL);
  EXPECT(strlen(rotdiv_last_error()) > 0);
  EXPECT(strstr(rotdiv_last_error_json(), "\"error\"") != NULL);
  rotdiv_rotation_free(NULL);
}

static void test_diversity(void) {
  rotdiv_scheme* ofdm = NULL;
  rotdiv_scheme* dft = NULL;
  rotdiv_rotation* id = NULL;
  rotdiv_rotation* phi = NULL;
  rotdiv_rotation* built = NULL;
  size_t ranks[4];
  size_t order = 0;
  int pass = -1;

  EXPECT(rotdiv_scheme_create("plain_ofdm", 4, 2, NULL, &ofdm) == ROTDIV_OK);
  EXPECT(rotdiv_scheme_create("dft_s_ofdm", 4, 2, NULL, &dft) == ROTDIV_OK);
  EXPECT(rotdiv_scheme_m(dft) == 4);
  EXPECT(rotdiv_scheme_mp(dft) == 2);
  EXPECT(strcmp(rotdiv_last_error_json(), "") == 0);

  EXPECT(rotdiv_check_full_diversity(ofdm, 2, 0, &pass, ranks) == ROTDIV_OK);
  EXPECT(pass == 0);
  EXPECT(ranks[0] == 1);
  EXPECT(rotdiv_check_full_diversity(dft, 2, 0, &pass, NULL) == ROTDIV_OK);
  EXPECT(pass == 1);

  EXPECT(rotdiv_rotation_identity(4, &id) == ROTDIV_OK);
  EXPECT(rotdiv_rotation_random(4, 3, &phi) == ROTDIV_OK);
  EXPECT(rotdiv_exhaustive_diversity(dft, id, "bpsk", 2, 0, 1, &order) == ROTDIV_OK);
  EXPECT(order == 1);
  EXPECT(rotdiv_exhaustive_diversity(dft, phi, "bpsk", 2, 0, 2, &order) == ROTDIV_OK);
  EXPECT(order == 2);
  EXPECT(rotdiv_exhaustive_diversity(dft, phi, "8psk", 2, 0, 1, &order) == ROTDIV_E_INPUT);

  EXPECT(rotdiv_construct_rotation(dft, "bpsk", 2, 0, 5, &built) == ROTDIV_OK);
  EXPECT(rotdiv_exhaustive_diversity(dft, built, "bpsk", 2, 0, 1, &order) == ROTDIV_OK);
  EXPECT(order == 2);

  /* L - 1 beyond the prefix */
  EXPECT(rotdiv_check_full_diversity(dft, 4, 0, &pass, NULL) == ROTDIV_E_INPUT);
  EXPECT(rotdiv_scheme_create("ofdm9", 4, 2, NULL, &ofdm) == ROTDIV_E_INPUT);

  rotdiv_rotation_free(id);
  rotdiv_rotation_free(phi);
  rotdiv_rotation_free(built);
  rotdiv_scheme_free(ofdm);
  rotdiv_scheme_free(dft);
}

static void test_experiments(void) {
  char* names = NULL;
  char* spec = NULL;
  char* report = NULL;
  rotdiv_run_options opts = {0, 0, 1, 1, 0, 0.0};
  const char* dir = "capi_out";

  EXPECT(rotdiv_list_presets(&names) == ROTDIV_OK);
  EXPECT(names != NULL && strstr(names, "fig2") != NULL);
  rotdiv_string_free(names);
  EXPECT(rotdiv_preset_spec("diversity", &spec) == ROTDIV_OK);
  EXPECT(spec != NULL && strstr(spec, "check-diversity") != NULL);
  rotdiv_string_free(spec);
  EXPECT(rotdiv_preset_spec("nope", &spec) == ROTDIV_E_INPUT);

  EXPECT(rotdiv_run_experiment(
             "{\"command\": \"check-diversity\", \"scheme\": {\"kind\": \"dft_s_ofdm\", \"m\": 4, "
             "\"mp\": 1}, \"channel\": {\"l\": 2}, \"rotations\": {\"count\": 5}}",
             dir, &opts, &report) == ROTDIV_OK);
  EXPECT(report != NULL && strstr(report, "\"n_full_order\": 5") != NULL);
  rotdiv_string_free(report);

  report = NULL;
  EXPECT(rotdiv_run_experiment("{\"command\": ", dir, NULL, &report) == ROTDIV_E_INPUT);
  EXPECT(report == NULL);
  EXPECT(strstr(rotdiv_last_error_json(), "\"field\":\"$\"") != NULL);
  EXPECT(rotdiv_run_experiment("{\"command\": \"check-diversity\", \"scheme\": {\"kind\": "
                               "\"dft_s_ofdm\", \"m\": 0, \"mp\": 1}, \"channel\": {\"l\": 1}}",
                               dir, NULL, NULL) == ROTDIV_E_INPUT);
  EXPECT(strstr(rotdiv_last_error_json(), "scheme.m") != NULL);
}

int main(void) {
  EXPECT(rotdiv_version() != NULL && strlen(rotdiv_version()) > 0);
  test_rotation_handles();
  test_diversity();
  test_experiments();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  puts("C API checks passed");
  return 0;
}
