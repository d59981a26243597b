#include <stdio.h>
#include <string.h>

#include "centering.h"

int main(int argc, char **argv) {
    if (argc != 2) return 64;
    CenteringDocument *doc = NULL;
    if (centering_document_load(argv[1], NULL, NULL, &doc) != CENTERING_STATUS_OK) {
        fprintf(stderr, "load: %s\n", centering_last_error());
        return 1;
    }
    CenteringRun *run = NULL;
    if (centering_run(doc, 32, CENTERING_TRACE_OFF, 0, &run) != CENTERING_STATUS_OK) {
        fprintf(stderr, "run: %s\n", centering_last_error());
        return 2;
    }
    CenteringAmbiguity a;
    centering_run_ambiguity(run, &a);
    char *table = NULL;
    centering_run_artifact(run, CENTERING_ARTIFACT_CENTERING, &table);
    printf("rows=%zu local=%zu global=%zu\n%s", centering_run_row_count(run), a.local, a.global, table);
    centering_string_free(table);

    CenteringDocument *missing = NULL;
    int status = centering_document_load("/nonexistent.doc", NULL, NULL, &missing);
    printf("missing=%d %s\n", status, missing == NULL && strstr(centering_last_error(), "nonexistent") ? "ok" : "bad");

    centering_run_free(run);
    centering_document_free(doc);
    return 0;
}
