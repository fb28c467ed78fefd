#include "giantpair/error.hpp"

#include <fmt/format.h>

namespace giantpair {

NormDriftError::NormDriftError(std::size_t step, double time, double drift)
    : Error(fmt::format("norm drift {:.3e} exceeds tolerance at step {} (t = {:.6g})", drift, step,
                        time)),
      step_(step),
      time_(time),
      drift_(drift) {}

}  // namespace giantpair
