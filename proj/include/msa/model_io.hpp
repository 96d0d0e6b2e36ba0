#pragma once

#include <filesystem>
#include <string_view>

#include "msa/model.hpp"

namespace msa {

inline constexpr int kModelFormatVersion = 1;

/// Parses a model document (JSON, "msa_version": 1). Throws SyntaxError with
/// line/column for malformed JSON or schema violations, and ModelError for
/// unknown node references, duplicate ids, a missing end effector or invalid
/// link/connection parameters.
ManipulatorModel parse_model(std::string_view text);

/// Reads and parses a model file. Throws SyntaxError if it cannot be read.
ManipulatorModel load_model(const std::filesystem::path& path);

}  // namespace msa
