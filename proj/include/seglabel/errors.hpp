#pragma once

#include <stdexcept>
#include <string>

namespace seglabel {

// Error taxonomy. Each category maps to a distinct CLI exit code so callers
// and scripts can tell input problems apart from config or internal failures.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or syntactically malformed input file.
struct format_error : error {
  using error::error;
};

// Well-formed file whose format_version / layout_version is unsupported.
struct version_error : error {
  using error::error;
};

// Structurally invalid data: indices out of range, overlapping segment
// membership, label names missing from the label space, dimension mismatches.
struct data_error : error {
  using error::error;
};

// Invalid configuration or parameter values.
struct config_error : error {
  using error::error;
};

// Synthetic-generator rule that could not be satisfied within its budget.
struct generation_error : error {
  using error::error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 64;
inline constexpr int format = 65;
inline constexpr int version = 66;
inline constexpr int data = 67;
inline constexpr int config = 68;
inline constexpr int generation = 69;
inline constexpr int failure = 70;
}  // namespace exit_code

}  // namespace seglabel
