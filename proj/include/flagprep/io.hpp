#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "flagprep/circuit.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// Parses a JSON code-catalog entry and applies its default state (or state_override if non-empty).
// Throws ParseError on malformed input and ValidationError when the state is inconsistent.
CssState parse_code_json(const std::string& text, const std::string& state_override = "");
CssState parse_code_file(const std::filesystem::path& path, const std::string& state_override = "");

// Resolves a code argument: an existing file path, or a catalog name looked up in catalog_dir.
std::filesystem::path resolve_code_path(const std::string& code, const std::filesystem::path& catalog_dir);

std::string serialize_circuit(const Circuit& c);
Circuit parse_circuit(const std::string& text);
Circuit read_circuit_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace flagprep
