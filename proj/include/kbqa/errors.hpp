#pragma once

#include <stdexcept>
#include <string>

namespace kbqa {

/// Input-file parse failure, carrying file and line context when known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg, std::string file = {},
                      std::size_t line = 0)
      : std::runtime_error(file.empty()
                               ? msg
                               : file + ":" + std::to_string(line) + ": " + msg),
        file_path(std::move(file)),
        line_number(line) {}
  std::string file_path;
  std::size_t line_number;
};

}  // namespace kbqa
