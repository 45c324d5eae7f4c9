#include "ocp/environment.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "ocp/errors.hpp"
#include "ocp/random.hpp"

namespace ocp {

void ModelParams::validate() const {
  require(d >= 1, "dimension d must be >= 1, got " + std::to_string(d));
  require(p > 0.0 && p < 1.0, "open probability p must lie in (0,1), got " + std::to_string(p));
  if (lambda) require(*lambda > 0.0 && std::isfinite(*lambda), "infection rate lambda must be positive");
}

double ModelParams::infection_rate() const {
  validate();
  require(lambda.has_value(), "infection rate lambda is required");
  return *lambda;
}

Vertex Vertex::unit(int d, int direction) {
  require(direction >= 1 && direction <= d,
          "direction " + std::to_string(direction) + " outside [1, " + std::to_string(d) + "]");
  Vertex v = origin(d);
  v.coords_[static_cast<std::size_t>(direction - 1)] = 1;
  return v;
}

Vertex Vertex::operator+(const Vertex& other) const {
  require(dim() == other.dim(), "vertex dimension mismatch");
  Vertex out = *this;
  for (std::size_t i = 0; i < coords_.size(); ++i) out.coords_[i] += other.coords_[i];
  return out;
}

Vertex Vertex::operator-(const Vertex& other) const {
  require(dim() == other.dim(), "vertex dimension mismatch");
  Vertex out = *this;
  for (std::size_t i = 0; i < coords_.size(); ++i) out.coords_[i] -= other.coords_[i];
  return out;
}

Vertex Vertex::operator-() const {
  Vertex out = *this;
  for (auto& c : out.coords_) c = -c;
  return out;
}

QuenchedEnvironment::QuenchedEnvironment(ModelParams params, std::uint64_t env_seed)
    : QuenchedEnvironment(params, env_seed, Vertex::origin(params.d)) {}

QuenchedEnvironment::QuenchedEnvironment(ModelParams params, std::uint64_t env_seed, Vertex origin_offset)
    : params_(params), seed_(env_seed), offset_(std::move(origin_offset)) {
  params_.validate();
  require(offset_.dim() == params_.d, "origin offset dimension does not match d");
  threshold_ = probability_threshold(params_.p);
}

QuenchedEnvironment QuenchedEnvironment::with_override(ModelParams params, EdgeOverride override_fn) {
  QuenchedEnvironment env(params, 0);
  env.override_ = std::make_shared<const EdgeOverride>(std::move(override_fn));
  return env;
}

QuenchedEnvironment QuenchedEnvironment::all_open(ModelParams params) {
  return with_override(params, [](std::span<const std::int64_t>, int) { return true; });
}

QuenchedEnvironment QuenchedEnvironment::all_closed(ModelParams params) {
  return with_override(params, [](std::span<const std::int64_t>, int) { return false; });
}

bool QuenchedEnvironment::is_open(std::span<const std::int64_t> from, int axis) const noexcept {
  std::int64_t shifted[kMaxMaskDim];
  const std::size_t d = from.size();
  const bool small = d <= static_cast<std::size_t>(kMaxMaskDim);
  if (override_) {
    if (small) {
      for (std::size_t i = 0; i < d; ++i) shifted[i] = from[i] + offset_[i];
      return (*override_)(std::span<const std::int64_t>(shifted, d), axis);
    }
    std::vector<std::int64_t> buf(d);
    for (std::size_t i = 0; i < d; ++i) buf[i] = from[i] + offset_[i];
    return (*override_)(buf, axis);
  }
  KeyedHash h(seed_, Domain::edge);
  h.add(d).add(static_cast<std::uint64_t>(axis));
  for (std::size_t i = 0; i < d; ++i) h.add_signed(from[i] + offset_[i]);
  return h.digest() < threshold_;
}

bool QuenchedEnvironment::edge_state(const DirectedEdge& e) const {
  require(e.from.dim() == params_.d, "edge dimension does not match environment dimension");
  require(e.direction >= 1 && e.direction <= params_.d, "edge direction outside [1, d]");
  return is_open(e.from.coords(), e.direction - 1);
}

std::uint32_t QuenchedEnvironment::out_mask(std::span<const std::int64_t> x) const noexcept {
  std::uint32_t mask = 0;
  for (int i = 0; i < params_.d && i < kMaxMaskDim; ++i)
    if (is_open(x, i)) mask |= 1U << i;
  return mask;
}

std::uint32_t QuenchedEnvironment::in_mask(std::span<const std::int64_t> x) const noexcept {
  std::int64_t tail[kMaxMaskDim];
  const std::size_t d = x.size();
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < d && i < static_cast<std::size_t>(kMaxMaskDim); ++i) tail[i] = x[i];
  for (int i = 0; i < params_.d && i < kMaxMaskDim; ++i) {
    tail[i] -= 1;
    if (is_open(std::span<const std::int64_t>(tail, d), i)) mask |= 1U << i;
    tail[i] += 1;
  }
  return mask;
}

QuenchedEnvironment QuenchedEnvironment::translate(const Vertex& x) const {
  require(x.dim() == params_.d, "translation vector dimension does not match d");
  QuenchedEnvironment out = *this;
  out.offset_ = offset_ + x;
  return out;
}

std::vector<Vertex> QuenchedEnvironment::open_in_neighbors(const Vertex& x) const {
  require(x.dim() == params_.d, "vertex dimension does not match d");
  std::vector<Vertex> out;
  for (int i = 1; i <= params_.d; ++i) {
    Vertex tail = x - Vertex::unit(params_.d, i);
    if (is_open(tail.coords(), i - 1)) out.push_back(std::move(tail));
  }
  return out;
}

std::vector<Vertex> QuenchedEnvironment::open_out_neighbors(const Vertex& x) const {
  require(x.dim() == params_.d, "vertex dimension does not match d");
  std::vector<Vertex> out;
  for (int i = 1; i <= params_.d; ++i)
    if (is_open(x.coords(), i - 1)) out.push_back(x + Vertex::unit(params_.d, i));
  return out;
}

nlohmann::json QuenchedEnvironment::to_json() const {
  require(!override_, "environments with an edge override are not serializable");
  return {{"d", params_.d},
          {"p", params_.p},
          {"env_seed", seed_},
          {"origin_offset", std::vector<std::int64_t>(offset_.coords().begin(), offset_.coords().end())}};
}

QuenchedEnvironment QuenchedEnvironment::from_json(const nlohmann::json& j) {
  ModelParams params;
  params.d = j.at("d").get<int>();
  params.p = j.at("p").get<double>();
  const auto seed = j.at("env_seed").get<std::uint64_t>();
  Vertex offset = Vertex::origin(params.d);
  if (j.contains("origin_offset")) offset = Vertex(j.at("origin_offset").get<std::vector<std::int64_t>>());
  return QuenchedEnvironment(params, seed, std::move(offset));
}

void check_enumeration_budget(int d, int n) {
  require(n >= 0, "path length must be nonnegative");
  const double work = std::pow(static_cast<double>(d), static_cast<double>(n));
  if (work > kEnumerationBudget)
    throw BudgetExceeded("enumeration of d^n = " + std::to_string(d) + "^" + std::to_string(n) +
                         " paths exceeds the budget of 1e7");
}

namespace {

std::uint64_t count_backward(const QuenchedEnvironment& env, std::vector<std::int64_t>& x, int remaining) {
  if (remaining == 0) return 1;
  std::uint64_t total = 0;
  for (int i = 0; i < env.dim(); ++i) {
    x[static_cast<std::size_t>(i)] -= 1;
    if (env.is_open(x, i)) total += count_backward(env, x, remaining - 1);
    x[static_cast<std::size_t>(i)] += 1;
  }
  return total;
}

}  // namespace

std::uint64_t count_open_paths_to_origin(const QuenchedEnvironment& env, int n) {
  check_enumeration_budget(env.dim(), n);
  std::vector<std::int64_t> x(static_cast<std::size_t>(env.dim()), 0);
  return count_backward(env, x, n);
}

}  // namespace ocp

std::size_t std::hash<ocp::Vertex>::operator()(const ocp::Vertex& v) const noexcept {
  ocp::KeyedHash h(0, ocp::Domain::probe);
  h.add_words(v.coords());
  return static_cast<std::size_t>(h.digest());
}
