#include "kv_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "swarmtree/core.hpp"

namespace swarmtree::detail {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

[[noreturn]] void bad_value(const KvEntry& e, const std::string& what) {
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + what);
}

}  // namespace

std::vector<KvEntry> read_kv(std::istream& in) {
  std::vector<KvEntry> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(n) + ": expected 'key = value'");
    }
    out.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n});
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

double to_double(const KvEntry& e, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(e, "not a number: '" + text + "'");
  return v;
}

long long to_int(const KvEntry& e, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(e, "not an integer: '" + text + "'");
  return v;
}

bool to_bool(const KvEntry& e, const std::string& text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  bad_value(e, "not a boolean: '" + text + "'");
}

}  // namespace swarmtree::detail
