#include "sludec/semantics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace sludec {

std::string act_pattern(const std::vector<DialogueAct>& acts) {
  std::set<std::string> names;
  for (const auto& a : acts) names.insert(a.act);
  if (names.empty()) return "null";
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += '+';
    out += n;
  }
  return out;
}

std::vector<std::string> split_pattern(const std::string& pattern) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= pattern.size()) {
    const auto end = pattern.find('+', start);
    const auto piece = pattern.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!piece.empty()) out.push_back(piece);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<SlotValue> reference_pairs(const std::vector<DialogueAct>& acts) {
  std::vector<SlotValue> out;
  for (const auto& a : acts)
    for (const auto& sv : a.slots)
      if (std::find(out.begin(), out.end(), sv) == out.end()) out.push_back(sv);
  return out;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace sludec
