#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "selinf.h"

static const char *PR_BOX =
    "{\"inputs\":[{\"name\":\"1\",\"values\":[\"x\",\"x'\"]},{\"name\":\"2\",\"values\":[\"y\",\"y'\"]}],"
    "\"treatments\":\"full\","
    "\"tables\":["
    "{\"treatment\":[\"x\",\"y\"],\"probs\":[{\"outcome\":[\"0\",\"0\"],\"p\":\"1/2\"},{\"outcome\":[\"1\",\"1\"],\"p\":\"1/2\"},{\"outcome\":[\"0\",\"1\"],\"p\":0},{\"outcome\":[\"1\",\"0\"],\"p\":0}]},"
    "{\"treatment\":[\"x\",\"y'\"],\"probs\":[{\"outcome\":[\"0\",\"0\"],\"p\":\"1/2\"},{\"outcome\":[\"1\",\"1\"],\"p\":\"1/2\"}]},"
    "{\"treatment\":[\"x'\",\"y\"],\"probs\":[{\"outcome\":[\"0\",\"0\"],\"p\":\"1/2\"},{\"outcome\":[\"1\",\"1\"],\"p\":\"1/2\"}]},"
    "{\"treatment\":[\"x'\",\"y'\"],\"probs\":[{\"outcome\":[\"0\",\"1\"],\"p\":\"1/2\"},{\"outcome\":[\"1\",\"0\"],\"p\":\"1/2\"}]}]}";

int main(void) {
    SelinfSystem *sys = NULL;
    if (selinf_system_from_json(PR_BOX, SELINF_ARITHMETIC_AUTO, &sys) != SELINF_STATUS_OK) {
        fprintf(stderr, "load failed: %s\n", selinf_last_error());
        return 1;
    }
    bool feasible = true;
    char *report = NULL;
    if (selinf_jdc(sys, &feasible, &report) != SELINF_STATUS_OK) {
        fprintf(stderr, "jdc failed: %s\n", selinf_last_error());
        return 1;
    }
    if (feasible || strstr(report, "\"certificate\"") == NULL) {
        fprintf(stderr, "unexpected verdict\n");
        return 1;
    }
    selinf_string_free(report);

    bool passed = true;
    if (selinf_check(sys, NULL, 0, &passed, &report) != SELINF_STATUS_OK || passed) {
        fprintf(stderr, "check failed\n");
        return 1;
    }
    selinf_string_free(report);
    selinf_system_free(sys);

    double d = 0.0;
    if (selinf_binormal_order_distance(0.0, &d) != SELINF_STATUS_OK || d != 0.25) {
        fprintf(stderr, "binormal failed\n");
        return 1;
    }
    if (selinf_binormal_order_distance(2.0, &d) != SELINF_STATUS_INVALID_ARGUMENT || selinf_last_error() == NULL) {
        fprintf(stderr, "bad correlation accepted\n");
        return 1;
    }
    printf("ok %s\n", selinf_version());
    return 0;
}
