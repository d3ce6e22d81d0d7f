#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ihw::hvq {

/// Quantized vectors over a finite integer alphabet; delta kernels become
/// exact equality.
using Pattern = std::vector<std::int64_t>;
using Composition = std::pair<std::size_t, std::size_t>;

struct PatternFamily {
  std::size_t part_length = 0;
  std::vector<Pattern> parts;
  std::vector<Composition> compositions;  // full pattern k = parts[first] ++ parts[second]

  std::size_t full_length() const noexcept { return 2 * part_length; }
  Pattern pattern(std::size_t k) const;
  /// Throws InvalidFamily on bad lengths, repeated parts or dangling indices.
  void validate() const;
};

/// Two parts x' (all zeros) and x'' (all ones) with the four compositions
/// x'+x'', x'+x', x''+x'', x''+x' in that order.
PatternFamily two_part_family(std::size_t part_length);

/// `parts` distinct random parts over {0..alphabet-1} and all parts^2 ordered
/// compositions, so every part is reused in 2 * parts compositions.
PatternFamily random_family(std::size_t parts, std::size_t part_length, std::uint64_t seed, std::int64_t alphabet = 4);

struct VQCodebook {
  std::vector<Pattern> entries;
};

struct HVQCodebook {
  std::size_t part_length = 0;
  std::vector<Pattern> part_entries;
  std::vector<Composition> composition_table;
};

VQCodebook build_vq(const PatternFamily& family);
HVQCodebook build_hvq(const PatternFamily& family);

std::size_t vq_cost(std::size_t entries, std::size_t full_length) noexcept;
std::size_t hvq_cost(std::size_t parts, std::size_t part_length, std::size_t rows, std::size_t index_weight = 1) noexcept;

/// Stored scalars: entries x full length.
std::size_t memory_cost(const VQCodebook& codebook);
/// Stored scalars: parts x part length + rows x 2 indices x index_weight.
std::size_t memory_cost(const HVQCodebook& codebook, std::size_t index_weight = 1);

/// Class index (composition row), or nullopt for NoMatch.
std::optional<std::size_t> classify(const VQCodebook& codebook, const Pattern& x);
std::optional<std::size_t> classify(const HVQCodebook& codebook, const Pattern& x);

std::string to_json(const PatternFamily& family);
PatternFamily family_from_json(std::string_view text);
std::string to_json(const VQCodebook& codebook);
std::string to_json(const HVQCodebook& codebook);

struct SweepRow {
  std::string family_id;
  std::size_t full_length = 0;
  std::size_t vq_cost = 0;
  std::size_t hvq_cost = 0;
  double ratio = 0.0;  // hvq / vq
};

SweepRow sweep_row(const std::string& family_id, const PatternFamily& family, std::size_t index_weight = 1);
/// "family_id,N,vq_cost,hvq_cost,ratio"
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace ihw::hvq
