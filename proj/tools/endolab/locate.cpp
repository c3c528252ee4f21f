#include "endolab/locate.hpp"

#include <cctype>
#include <vector>

namespace endolab::cli {
namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

struct Frame {
  bool object = false;
  std::string path;
  std::string key;
  int index = 0;
  bool expect_key = true;
};

}  // namespace

std::map<std::string, int> value_lines(const std::string& text) {
  std::map<std::string, int> out;
  std::vector<Frame> stack;
  int line = 1;
  std::size_t i = 0;

  const auto here = [&]() -> std::string {
    if (stack.empty()) return "";
    const Frame& f = stack.back();
    return f.path + "/" + (f.object ? escape_token(f.key) : std::to_string(f.index));
  };
  const auto read_string = [&]() {
    std::string s;
    ++i;  // opening quote
    while (i < text.size() && text[i] != '"') {
      if (text[i] == '\\' && i + 1 < text.size()) {
        s += text[i + 1];
        i += 2;
        continue;
      }
      if (text[i] == '\n') ++line;
      s += text[i++];
    }
    ++i;
    return s;
  };

  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ':') {
      ++i;
      continue;
    }
    if (ch == ',') {
      if (stack.empty()) break;
      if (stack.back().object) {
        stack.back().expect_key = true;
      } else {
        ++stack.back().index;
      }
      ++i;
      continue;
    }
    if (ch == '}' || ch == ']') {
      if (stack.empty()) break;
      stack.pop_back();
      ++i;
      continue;
    }
    if (!stack.empty() && stack.back().object && stack.back().expect_key) {
      if (ch != '"') break;
      stack.back().key = read_string();
      stack.back().expect_key = false;
      continue;
    }
    const std::string path = here();
    out.emplace(path, line);
    if (ch == '{' || ch == '[') {
      stack.push_back(Frame{ch == '{', path, "", 0, true});
      ++i;
    } else if (ch == '"') {
      read_string();
    } else {
      while (i < text.size() && text[i] != ',' && text[i] != '}' && text[i] != ']' &&
             text[i] != '\n') {
        ++i;
      }
    }
  }
  return out;
}

int line_of(const std::map<std::string, int>& lines, std::string pointer) {
  while (true) {
    const auto it = lines.find(pointer);
    if (it != lines.end()) return it->second;
    if (pointer.empty()) return 0;
    pointer.erase(pointer.rfind('/'));
  }
}

int line_at(const std::string& text, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace endolab::cli
