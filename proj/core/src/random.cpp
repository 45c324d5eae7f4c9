#include "ocp/random.hpp"

namespace ocp {

std::uint64_t seed_schedule(std::uint64_t master_seed, std::string_view label, std::uint64_t index) noexcept {
  KeyedHash h(master_seed, Domain::seed_schedule);
  h.add(label.size());
  std::uint64_t word = 0;
  std::size_t filled = 0;
  for (unsigned char c : label) {
    word |= static_cast<std::uint64_t>(c) << (8 * filled);
    if (++filled == 8) {
      h.add(word);
      word = 0;
      filled = 0;
    }
  }
  if (filled != 0) h.add(word);
  h.add(index);
  return h.digest();
}

}  // namespace ocp
