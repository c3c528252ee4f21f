#pragma once

#include <map>
#include <string>

namespace endolab::cli {

/// Maps JSON pointers of a document to the 1-based line where each value starts.
/// Tolerant of malformed input: scanning stops at the first structural surprise.
std::map<std::string, int> value_lines(const std::string& text);

/// Line of `pointer`, falling back to its nearest located ancestor (0 if none).
int line_of(const std::map<std::string, int>& lines, std::string pointer);

/// 1-based line containing byte offset `pos`.
int line_at(const std::string& text, std::size_t pos);

}  // namespace endolab::cli
