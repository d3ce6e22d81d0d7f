#include "ihw/hvq.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ihw/error.hpp"
#include "ihw/format.hpp"
#include "ihw/rng.hpp"
#include "json.hpp"

namespace ihw::hvq {

namespace {

void reject_duplicates(const std::vector<Composition>& compositions) {
  std::set<Composition> seen;
  for (const auto& c : compositions)
    if (!seen.insert(c).second)
      throw Error(ErrorCode::DuplicateComposition,
                  "(" + std::to_string(c.first) + ", " + std::to_string(c.second) + ") appears twice");
}

std::optional<std::size_t> find_entry(const std::vector<Pattern>& entries, const Pattern& x) {
  const auto it = std::find(entries.begin(), entries.end(), x);
  if (it == entries.end()) return std::nullopt;
  return static_cast<std::size_t>(it - entries.begin());
}

}  // namespace

Pattern PatternFamily::pattern(std::size_t k) const {
  const auto& [a, b] = compositions.at(k);
  Pattern out = parts.at(a);
  out.insert(out.end(), parts.at(b).begin(), parts.at(b).end());
  return out;
}

void PatternFamily::validate() const {
  if (part_length == 0) throw Error(ErrorCode::InvalidFamily, "part_length must be >= 1");
  if (parts.empty()) throw Error(ErrorCode::InvalidFamily, "family needs at least one part");
  for (const auto& p : parts)
    if (p.size() != part_length) throw Error(ErrorCode::InvalidFamily, "part length differs from part_length");
  std::set<Pattern> distinct(parts.begin(), parts.end());
  if (distinct.size() != parts.size()) throw Error(ErrorCode::InvalidFamily, "parts must be distinct");
  for (const auto& [a, b] : compositions)
    if (a >= parts.size() || b >= parts.size()) throw Error(ErrorCode::InvalidFamily, "composition references a missing part");
}

PatternFamily two_part_family(std::size_t part_length) {
  PatternFamily f;
  f.part_length = part_length;
  f.parts = {Pattern(part_length, 0), Pattern(part_length, 1)};
  f.compositions = {{0, 1}, {0, 0}, {1, 1}, {1, 0}};
  f.validate();
  return f;
}

PatternFamily random_family(std::size_t parts, std::size_t part_length, std::uint64_t seed, std::int64_t alphabet) {
  if (parts == 0 || part_length == 0 || alphabet < 2) throw Error(ErrorCode::InvalidFamily, "bad random family shape");
  if (std::pow(static_cast<double>(alphabet), static_cast<double>(part_length)) < static_cast<double>(parts))
    throw Error(ErrorCode::InvalidFamily, "alphabet too small for that many distinct parts");
  Rng rng(derive_seed(seed, {parts, part_length}));
  std::uniform_int_distribution<std::int64_t> symbol(0, alphabet - 1);
  PatternFamily f;
  f.part_length = part_length;
  std::set<Pattern> seen;
  while (f.parts.size() < parts) {
    Pattern p(part_length);
    for (auto& v : p) v = symbol(rng);
    if (seen.insert(p).second) f.parts.push_back(std::move(p));
  }
  for (std::size_t a = 0; a < parts; ++a)
    for (std::size_t b = 0; b < parts; ++b) f.compositions.emplace_back(a, b);
  return f;
}

VQCodebook build_vq(const PatternFamily& family) {
  family.validate();
  reject_duplicates(family.compositions);
  VQCodebook cb;
  for (std::size_t k = 0; k < family.compositions.size(); ++k) cb.entries.push_back(family.pattern(k));
  return cb;
}

HVQCodebook build_hvq(const PatternFamily& family) {
  family.validate();
  reject_duplicates(family.compositions);
  return {family.part_length, family.parts, family.compositions};
}

std::size_t vq_cost(std::size_t entries, std::size_t full_length) noexcept { return entries * full_length; }

std::size_t hvq_cost(std::size_t parts, std::size_t part_length, std::size_t rows, std::size_t index_weight) noexcept {
  return parts * part_length + rows * 2 * index_weight;
}

std::size_t memory_cost(const VQCodebook& codebook) {
  return codebook.entries.empty() ? 0 : vq_cost(codebook.entries.size(), codebook.entries.front().size());
}

std::size_t memory_cost(const HVQCodebook& codebook, std::size_t index_weight) {
  return hvq_cost(codebook.part_entries.size(), codebook.part_length, codebook.composition_table.size(), index_weight);
}

std::optional<std::size_t> classify(const VQCodebook& codebook, const Pattern& x) {
  return find_entry(codebook.entries, x);
}

std::optional<std::size_t> classify(const HVQCodebook& codebook, const Pattern& x) {
  const std::size_t L = codebook.part_length;
  if (x.size() != 2 * L) return std::nullopt;
  const auto left = find_entry(codebook.part_entries, Pattern(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(L)));
  if (!left) return std::nullopt;
  const auto right = find_entry(codebook.part_entries, Pattern(x.begin() + static_cast<std::ptrdiff_t>(L), x.end()));
  if (!right) return std::nullopt;
  const auto& table = codebook.composition_table;
  const auto it = std::find(table.begin(), table.end(), Composition{*left, *right});
  if (it == table.end()) return std::nullopt;
  return static_cast<std::size_t>(it - table.begin());
}

std::string to_json(const PatternFamily& family) {
  nlohmann::json doc{{"part_length", family.part_length}, {"parts", family.parts}, {"compositions", family.compositions}};
  return doc.dump(2);
}

PatternFamily family_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    PatternFamily f;
    f.part_length = doc.at("part_length").get<std::size_t>();
    f.parts = doc.at("parts").get<std::vector<Pattern>>();
    f.compositions = doc.at("compositions").get<std::vector<Composition>>();
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("pattern family: ") + e.what());
  }
}

std::string to_json(const VQCodebook& codebook) {
  nlohmann::json doc{{"kind", "vq"}, {"entries", codebook.entries}, {"memory_cost", memory_cost(codebook)}};
  return doc.dump(2);
}

std::string to_json(const HVQCodebook& codebook) {
  nlohmann::json doc{{"kind", "hvq"},
                     {"part_length", codebook.part_length},
                     {"part_entries", codebook.part_entries},
                     {"composition_table", codebook.composition_table},
                     {"memory_cost", memory_cost(codebook)}};
  return doc.dump(2);
}

SweepRow sweep_row(const std::string& family_id, const PatternFamily& family, std::size_t index_weight) {
  const auto vq = memory_cost(build_vq(family));
  const auto hvq = memory_cost(build_hvq(family), index_weight);
  return {family_id, family.full_length(), vq, hvq, static_cast<double>(hvq) / static_cast<double>(vq)};
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "family_id,N,vq_cost,hvq_cost,ratio\n";
  for (const auto& r : rows)
    out << r.family_id << ',' << r.full_length << ',' << r.vq_cost << ',' << r.hvq_cost << ',' << format_double(r.ratio)
        << '\n';
  return out.str();
}

}  // namespace ihw::hvq
