#pragma once

// Oriented bond percolation on Z^d: each forward edge x -> x + e_i is open
// independently with probability p. The field is never stored; an edge's
// state is a keyed hash of (seed, translated edge), so the infinite lattice is
// available lazily and any query can be replayed.

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ocp {

/// (d, p, lambda); lambda is absent for purely geometric work.
struct ModelParams {
  int d = 1;
  double p = 0.5;
  std::optional<double> lambda;

  void validate() const;
  /// Validates and returns lambda; throws ContractViolation when absent.
  double infection_rate() const;
  ModelParams with_lambda(double rate) const {
    ModelParams copy = *this;
    copy.lambda = rate;
    return copy;
  }
};

class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(std::vector<std::int64_t> coords) : coords_(std::move(coords)) {}
  Vertex(std::initializer_list<std::int64_t> coords) : coords_(coords) {}

  static Vertex origin(int d) { return Vertex(std::vector<std::int64_t>(static_cast<std::size_t>(d), 0)); }
  /// e_direction with direction in [1, d].
  static Vertex unit(int d, int direction);

  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  std::span<const std::int64_t> coords() const noexcept { return coords_; }
  std::int64_t operator[](std::size_t i) const { return coords_[i]; }
  std::int64_t& operator[](std::size_t i) { return coords_[i]; }

  Vertex operator+(const Vertex& other) const;
  Vertex operator-(const Vertex& other) const;
  Vertex operator-() const;

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;

 private:
  std::vector<std::int64_t> coords_;
};

/// The edge from -> from + e_direction, direction in [1, d].
struct DirectedEdge {
  Vertex from;
  int direction = 1;

  Vertex head() const { return from + Vertex::unit(from.dim(), direction); }
};

/// Replaces the hashed field; receives absolute coordinates of the tail and a
/// 0-based axis. Used to build fixed geometries (isolated sites, a single open
/// edge, an all-open lattice).
using EdgeOverride = std::function<bool(std::span<const std::int64_t> from, int axis)>;

class QuenchedEnvironment {
 public:
  QuenchedEnvironment(ModelParams params, std::uint64_t env_seed);
  QuenchedEnvironment(ModelParams params, std::uint64_t env_seed, Vertex origin_offset);

  static QuenchedEnvironment with_override(ModelParams params, EdgeOverride override_fn);
  static QuenchedEnvironment all_open(ModelParams params);
  static QuenchedEnvironment all_closed(ModelParams params);

  const ModelParams& params() const noexcept { return params_; }
  int dim() const noexcept { return params_.d; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Vertex& origin_offset() const noexcept { return offset_; }

  /// Checked query; throws ContractViolation on dimension or direction mismatch.
  bool edge_state(const DirectedEdge& e) const;

  /// Unchecked hot-path query: edge from -> from + e_axis, axis 0-based.
  bool is_open(std::span<const std::int64_t> from, int axis) const noexcept;

  /// Bit i set iff x -> x + e_i is open.
  std::uint32_t out_mask(std::span<const std::int64_t> x) const noexcept;
  /// Bit i set iff x - e_i -> x is open.
  std::uint32_t in_mask(std::span<const std::int64_t> x) const noexcept;

  /// T_x: the returned environment sees this one's edge at x + e.
  QuenchedEnvironment translate(const Vertex& x) const;

  /// {x - e_i : x - e_i -> x open}.
  std::vector<Vertex> open_in_neighbors(const Vertex& x) const;
  /// {x + e_i : x -> x + e_i open}.
  std::vector<Vertex> open_out_neighbors(const Vertex& x) const;

  nlohmann::json to_json() const;
  static QuenchedEnvironment from_json(const nlohmann::json& j);

 private:
  ModelParams params_;
  std::uint64_t seed_ = 0;
  Vertex offset_;
  std::uint64_t threshold_ = 0;
  std::shared_ptr<const EdgeOverride> override_;
};

/// Dimension at which in/out masks stop fitting in 32 bits.
inline constexpr int kMaxMaskDim = 32;

/// Work limit for exact d^n path enumerations.
inline constexpr double kEnumerationBudget = 1e7;

/// Throws BudgetExceeded when d^n exceeds the enumeration budget.
void check_enumeration_budget(int d, int n);

/// l_n: number of length-n oriented paths ending at the origin whose every
/// edge is open. l_0 = 1.
std::uint64_t count_open_paths_to_origin(const QuenchedEnvironment& env, int n);

}  // namespace ocp

template <>
struct std::hash<ocp::Vertex> {
  std::size_t operator()(const ocp::Vertex& v) const noexcept;
};
