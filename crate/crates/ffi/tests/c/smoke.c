#include <stdio.h>
#include "svmscreen.h"

int main(void) {
    SvmDataset *d = NULL;
    if (svm_dataset_parse("+1 1:1 3:1\n+1 2:1 3:1\n-1 1:1 2:1 3:1\n", &d) != SVM_STATUS_OK) {
        fprintf(stderr, "%s\n", svm_last_error());
        return 1;
    }
    double lm = 0.0, bias = 0.0;
    svm_lambda_max(d, &lm, &bias);
    SvmScreenReport *r = NULL;
    if (svm_screen(d, 0.0, NULL, 0, 0.5 * lm, &r) != SVM_STATUS_OK) {
        fprintf(stderr, "%s\n", svm_last_error());
        return 1;
    }
    size_t kept[3];
    size_t count = 0;
    svm_report_kept(r, kept, 3, &count);
    printf("%zu", count);
    for (size_t i = 0; i < count; i++) {
        printf(" %zu", kept[i]);
    }
    printf("\n");
    svm_report_free(r);
    svm_dataset_free(d);
    return 0;
}
