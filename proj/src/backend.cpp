#include "devchat/backend.hpp"

namespace devchat {

std::string_view to_string(BackendFailure failure) {
  switch (failure) {
    case BackendFailure::Timeout: return "timeout";
    case BackendFailure::RateLimited: return "rate_limited";
    case BackendFailure::TransportError: return "transport_error";
    case BackendFailure::ModelRefusal: return "model_refusal";
  }
  return "transport_error";
}

bool is_transient(BackendFailure failure) { return failure != BackendFailure::ModelRefusal; }

}  // namespace devchat
