#pragma once

#include <stdexcept>
#include <string>

namespace iamflood {

/// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input error tied to a location in a text file.
inline InputError input_error(const std::string& path, std::size_t line, const std::string& what)
{
  return InputError(path + ":" + std::to_string(line) + ": " + what);
}

} // namespace iamflood
