#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace swarmtree::detail {

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
std::vector<KvEntry> read_kv(std::istream& in);

std::vector<std::string> split_list(const std::string& value);
double to_double(const KvEntry& e, const std::string& text);
long long to_int(const KvEntry& e, const std::string& text);
bool to_bool(const KvEntry& e, const std::string& text);

}  // namespace swarmtree::detail
