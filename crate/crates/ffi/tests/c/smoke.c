#include <stdio.h>
#include <string.h>

#include "agentloop.h"

static int fail(const char *what) {
    const char *msg = al_last_error_message();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
    return 1;
}

int main(void) {
    AlSimulation *sim = NULL;
    char *trace = NULL;
    char *state = NULL;
    uint64_t step = 0;

    printf("agentloop %s\n", al_version());
    if (al_gol_pattern_new(".....\n..#..\n..#..\n..#..\n.....\n", 0, 0, &sim) != AL_STATUS_OK)
        return fail("al_gol_pattern_new");
    if (al_sim_run(sim, 2, &trace) != AL_STATUS_OK)
        return fail("al_sim_run");
    if (al_sim_state_json(sim, &state) != AL_STATUS_OK)
        return fail("al_sim_state_json");
    if (al_sim_current_step(sim, &step) != AL_STATUS_OK)
        return fail("al_sim_current_step");
    printf("step %llu, %zu trace bytes\n%s\n", (unsigned long long)step, strlen(trace), state);
    al_string_free(trace);
    al_string_free(state);
    al_sim_free(sim);

    if (al_sim_run(NULL, 1, &trace) != AL_STATUS_NULL_ARGUMENT)
        return 1;
    printf("expected failure: %s\n", al_last_error_message());
    return 0;
}
