#pragma once

#include <stdexcept>
#include <string>

namespace storyarcs {

// Base for every failure raised by the library. Callers that only need to
// report a problem can catch this; the derived types carry the details.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace storyarcs
