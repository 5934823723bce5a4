#include <stdio.h>
#include "omnigame.h"

int main(void) {
    const char *json = "{\"type\":\"packets\",\"users\":{\"1\":[\"a\",\"b\",\"c\",\"d\",\"e\"],"
                       "\"2\":[\"a\",\"b\",\"f\"],\"3\":[\"c\",\"d\",\"f\"]}}";
    OmniModel *model = NULL;
    if (omni_model_from_json(json, &model) != OMNI_STATUS_OK) {
        char *err = omni_last_error();
        fprintf(stderr, "load failed: %s\n", err ? err : "?");
        omni_string_free(err);
        return 1;
    }
    OmniRational r_co;
    omni_min_sum_rate(model, false, &r_co);
    printf("R_CO = %lld/%lld\n", (long long)r_co.numerator, (long long)r_co.denominator);

    OmniRational rates[3];
    if (omni_shapley(model, "4", rates, 3) == OMNI_STATUS_OK) {
        for (int i = 0; i < 3; i++)
            printf("r_%d = %lld/%lld\n", i + 1, (long long)rates[i].numerator, (long long)rates[i].denominator);
    }
    OmniStatus status = omni_shapley(model, "3", rates, 3);
    char *err = omni_last_error();
    printf("alpha = 3: status %d (%s)\n", (int)status, err ? err : "");
    omni_string_free(err);
    omni_model_free(model);
    return 0;
}
