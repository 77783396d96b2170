#include <stdio.h>
#include <string.h>

#include "fdexplain.h"

static const char *TRIANGLE =
    "var x in {0,1,2}; var y in {0,1,2}; var z in {0,1,2};\n"
    "constraint x < y; constraint y < z; constraint z < x;\n";

int main(void) {
    FdxModel *model = NULL;
    FdxResult *result = NULL;
    char *text = NULL;
    bool failed = false;
    size_t var = 0;

    if (fdx_model_parse(TRIANGLE, FDX_MODE_FULL, &model) != FDX_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", fdx_last_error_message());
        return 1;
    }
    if (fdx_propagate(model, FDX_STRATEGY_WORKLIST, 0, false, &result) != FDX_STATUS_OK) {
        fprintf(stderr, "propagate: %s\n", fdx_last_error_message());
        return 1;
    }
    fdx_result_failed(result, &failed, &var);
    if (fdx_result_explain(result, "x", 0, FDX_FORMAT_TEXT, &text) != FDX_STATUS_OK) {
        fprintf(stderr, "explain: %s\n", fdx_last_error_message());
        return 1;
    }
    int ok = !failed && strcmp(text, "(0, x) [(0, r6)]\n") == 0;
    printf("%s", text);
    fdx_string_free(text);
    fdx_result_free(result);
    fdx_model_free(model);
    return ok ? 0 : 1;
}
