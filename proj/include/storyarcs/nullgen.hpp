#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storyarcs/error.hpp"

namespace storyarcs {

enum class NullKind { salad, markov2 };

std::string_view to_string(NullKind kind);
NullKind parse_null_kind(std::string_view name);

struct NullSpec {
  NullKind kind = NullKind::salad;
  std::uint64_t seed = 0;
  std::size_t replicas = 10;
};

class NullError : public Error {
 public:
  using Error::Error;
};

// Seeded uniform permutation of the tokens.
std::vector<std::string> word_salad(std::span<const std::string> tokens, std::uint64_t seed);

// Bigram chain trained on the book itself. Starts from a uniformly chosen
// vocabulary word; a word with no recorded successor (only seen as the last
// token) restarts the chain the same way. Emits exactly out_length tokens,
// defaulting to the book's own length.
std::vector<std::string> markov_nonsense(std::span<const std::string> tokens, std::uint64_t seed,
                                         std::optional<std::size_t> out_length = std::nullopt);

// Seed for one replica of one book, independent of processing order.
std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t book_id, std::size_t replica);

// All replicas of one book. Markov replicas expect punctuation-preserving
// tokens.
std::vector<std::vector<std::string>> null_replicas(std::span<const std::string> tokens,
                                                    std::int64_t book_id, const NullSpec& spec);

}  // namespace storyarcs
