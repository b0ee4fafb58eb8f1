#include "deephedge/errors.hpp"

namespace dh {

NumericError::NumericError(const std::string& what, std::optional<long> batch_index,
                           std::optional<long> epoch)
    : std::runtime_error(what), batch_index_(batch_index), epoch_(epoch) {}

}  // namespace dh
