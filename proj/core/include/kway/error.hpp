#pragma once

#include <stdexcept>
#include <string>

namespace kway {

// Malformed or inconsistent data files (set files, embedding files, dataset
// TSVs). The CLI maps this to exit code 2.
class format_error : public std::runtime_error {
 public:
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kway
