// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "wkbgreen/validation.hpp"

#include <cstdio>

int main() {
    int failed = 0;
    for (int id = 1; id <= wkbgreen::criterion_count; ++id) {
        const auto r = wkbgreen::run_criterion(id);
        std::printf("criterion %d [%s] %s: %s (%.2f s)\n", id, r.passed ? "PASS" : "FAIL", r.title.c_str(),
                    r.summary.c_str(), r.seconds);
        std::fflush(stdout);
        if (!r.passed) ++failed;
    }
    std::printf("%d of %d criteria passed\n", wkbgreen::criterion_count - failed, wkbgreen::criterion_count);
    return failed == 0 ? 0 : 1;
}
