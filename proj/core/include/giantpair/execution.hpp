#pragma once

namespace giantpair {

// Worker selection for the data-parallel kernels. Every kernel reduces
// per-row partials in a fixed order, so results do not depend on the
// thread count; `sequential` additionally pins everything to one thread.
struct Execution {
    int threads = 0;  // 0: runtime default
    bool sequential = false;

    static Execution serial() { return {1, true}; }
};

int worker_count(const Execution& exec);

}  // namespace giantpair
