#include "storyarcs/nullgen.hpp"

#include <algorithm>
#include <unordered_map>

#include "storyarcs/random.hpp"

namespace storyarcs {

std::string_view to_string(NullKind kind) { return kind == NullKind::salad ? "salad" : "markov"; }

NullKind parse_null_kind(std::string_view name) {
  if (name == "salad") return NullKind::salad;
  if (name == "markov" || name == "markov2") return NullKind::markov2;
  throw NullError("unknown null kind '" + std::string(name) + "'");
}

std::vector<std::string> word_salad(std::span<const std::string> tokens, std::uint64_t seed) {
  std::vector<std::string> out(tokens.begin(), tokens.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(out));
  return out;
}

std::vector<std::string> markov_nonsense(std::span<const std::string> tokens, std::uint64_t seed,
                                         std::optional<std::size_t> out_length) {
  if (tokens.size() < 2) throw NullError("Markov text needs at least two training tokens");
  const std::size_t length = out_length.value_or(tokens.size());

  // Vocabulary in first-appearance order keeps the table independent of
  // hash iteration order.
  std::unordered_map<std::string_view, std::size_t> id_of;
  std::vector<std::string_view> vocab;
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto [it, inserted] = id_of.emplace(t, vocab.size());
    if (inserted) vocab.push_back(t);
    ids.push_back(it->second);
  }

  struct Successors {
    std::vector<std::size_t> next;     // successor ids, first-seen order
    std::vector<std::uint64_t> cumulative;  // running counts
  };
  std::vector<Successors> table(vocab.size());
  {
    std::vector<std::unordered_map<std::size_t, std::size_t>> slot(vocab.size());
    std::vector<std::vector<std::uint64_t>> counts(vocab.size());
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      auto& s = table[ids[i]];
      const auto [it, inserted] = slot[ids[i]].emplace(ids[i + 1], s.next.size());
      if (inserted) {
        s.next.push_back(ids[i + 1]);
        counts[ids[i]].push_back(0);
      }
      ++counts[ids[i]][it->second];
    }
    for (std::size_t w = 0; w < vocab.size(); ++w) {
      std::uint64_t running = 0;
      for (const auto c : counts[w]) table[w].cumulative.push_back(running += c);
    }
  }

  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(length);
  std::size_t current = 0;
  bool restart = true;
  while (out.size() < length) {
    if (restart) {
      current = static_cast<std::size_t>(rng.index(vocab.size()));
      restart = false;
    } else {
      const auto& s = table[current];
      const std::uint64_t draw = rng.index(s.cumulative.back());
      const auto pos = std::upper_bound(s.cumulative.begin(), s.cumulative.end(), draw) - s.cumulative.begin();
      current = s.next[static_cast<std::size_t>(pos)];
    }
    out.emplace_back(vocab[current]);
    if (table[current].next.empty()) restart = true;
  }
  return out;
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t book_id, std::size_t replica) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(book_id), replica);
}

std::vector<std::vector<std::string>> null_replicas(std::span<const std::string> tokens,
                                                    std::int64_t book_id, const NullSpec& spec) {
  if (spec.replicas < 1) throw NullError("at least one replica is required");
  std::vector<std::vector<std::string>> out;
  out.reserve(spec.replicas);
  for (std::size_t r = 0; r < spec.replicas; ++r) {
    const std::uint64_t seed = replica_seed(spec.seed, book_id, r);
    out.push_back(spec.kind == NullKind::salad ? word_salad(tokens, seed) : markov_nonsense(tokens, seed));
  }
  return out;
}

}  // namespace storyarcs
