/* Compiled as C to keep the public header C-clean. */
#include "botflow/botflow.h"

int c_header_check_run(void) {
  bf_label_distribution d;
  bf_label_class cls = BF_BACKGROUND;
  int fallback = 0;
  unsigned mask = 0;
  if (bf_classify_label("flow=From-Botnet-V42-TCP-CC1", &cls, &fallback) != BF_OK) return 1;
  if (cls != BF_CNC) return 2;
  if (bf_parse_class_set("botnet,cnc", &mask) != BF_OK || mask != BF_DEFAULT_POSITIVE_MASK) return 3;
  if (bf_flows_distribution(NULL, &d) != BF_E_INVALID_ARGUMENT) return 4;
  if (bf_last_error()[0] == '\0') return 5;
  return 0;
}
