#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace anamine {

using json = nlohmann::json;

// Calls fn(line_number, parsed_object) for every non-empty line.
// Throws std::runtime_error naming the file and line on parse failure.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

// One object per line, '\n' terminated.
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& rows);

void write_text_file(const std::filesystem::path& path, const std::string& text);

// Shortest-exact decimal text for a double ("%.17g" trimmed by round-trip).
std::string format_double(double x);

}  // namespace anamine
