#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "wigner.h"

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, \
              #cond);                                                  \
      return 1;                                                        \
    }                                                                  \
  } while (0)

int main(void) {
  WignerDensity *rho = NULL;
  EXPECT(wigner_density_from_spec("fock:1", 0, &rho) == WIGNER_STATUS_OK);
  EXPECT(wigner_density_dim(rho) == 2);

  WignerGrid grid = {-4.0, 4.0, 161, -4.0, 4.0, 161};
  WignerField *field = NULL;
  EXPECT(wigner_field_series(rho, &grid, &field) == WIGNER_STATUS_OK);
  size_t n = wigner_field_len(field);
  EXPECT(n == 161 * 161);
  double *values = malloc(n * sizeof(double));
  EXPECT(wigner_field_values(field, values, n) == WIGNER_STATUS_OK);
  /* centre sample: W(0) of |1> is -2/pi */
  EXPECT(fabs(values[80 * 161 + 80] + 2.0 / M_PI) < 1e-12);
  WignerMetrics m;
  EXPECT(wigner_field_metrics(field, &m) == WIGNER_STATUS_OK);
  EXPECT(fabs(m.integral - 1.0) < 1e-6);
  EXPECT(!isnan(m.negativity));

  WignerDensity *bad = NULL;
  EXPECT(wigner_density_from_spec("nonsense", 0, &bad) ==
         WIGNER_STATUS_INVALID_ARGUMENT);
  EXPECT(bad == NULL);
  char msg[256];
  EXPECT(wigner_last_error_message(msg, sizeof msg) > 1);

  free(values);
  wigner_field_free(field);
  wigner_density_free(rho);
  printf("ok %s\n", wigner_version());
  return 0;
}
