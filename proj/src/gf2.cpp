#include "qpake/gf2.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace qpake {

// ---------------------------------------------------------------- hashing

UniversalHash::UniversalHash(std::uint64_t seed, BitString diagonal,
                             std::size_t in, std::size_t out)
    : seed_(seed), diagonal_(std::move(diagonal)), input_len_(in),
      output_len_(out) {
  rows_.reserve(output_len_);
  for (std::size_t r = 0; r < output_len_; ++r) {
    BitString row(input_len_);
    for (std::size_t c = 0; c < input_len_; ++c)
      row.set(c, diagonal_.get(r + input_len_ - 1 - c));
    rows_.push_back(std::move(row));
  }
}

UniversalHash UniversalHash::sample(std::uint64_t seed, std::size_t input_len,
                                    std::size_t output_len) {
  if (output_len > input_len || output_len == 0)
    throw std::invalid_argument("UniversalHash: need 0 < output_len <= input_len");
  Rng rng(seed);
  BitString diag = BitString::random(input_len + output_len - 1, rng);
  return UniversalHash(seed, std::move(diag), input_len, output_len);
}

UniversalHash UniversalHash::from_diagonal(const BitString& diagonal,
                                           std::size_t input_len,
                                           std::size_t output_len) {
  if (output_len > input_len || output_len == 0)
    throw std::invalid_argument("UniversalHash: need 0 < output_len <= input_len");
  if (diagonal.size() != input_len + output_len - 1)
    throw std::invalid_argument("UniversalHash: diagonal length mismatch");
  return UniversalHash(0, diagonal, input_len, output_len);
}

BitString UniversalHash::eval(const BitString& x) const {
  if (x.size() != input_len_)
    throw std::invalid_argument("UniversalHash: input length mismatch");
  BitString out(output_len_);
  for (std::size_t r = 0; r < output_len_; ++r) out.set(r, dot(rows_[r], x));
  return out;
}

// ------------------------------------------------------------- syndromes

namespace {

// Rank of a row set over GF(2); destroys its copy of the rows.
std::size_t gf2_rank(std::vector<BitString> rows) {
  std::size_t rank = 0;
  const std::size_t width = rows.empty() ? 0 : rows[0].size();
  for (std::size_t col = 0; col < width && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && !rows[pivot].get(col)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != rank && rows[r].get(col)) rows[r] = rows[r] ^ rows[rank];
    ++rank;
  }
  return rank;
}

double enumeration_volume(std::size_t n, std::size_t radius) {
  double total = 1.0;
  double term = 1.0;
  for (std::size_t w = 1; w <= radius && w <= n; ++w) {
    term *= static_cast<double>(n - w + 1) / static_cast<double>(w);
    total += term;
    if (total > 1e18) return total;
  }
  return total;
}

constexpr double kTableVolumeCap = 4.0e6;
constexpr std::size_t kTableSyndromeCap = 24;
constexpr std::size_t kPairScanCap = 300000;

std::uint64_t pack_low_bits(const BitString& s) {
  return s.words().empty() ? 0 : s.words()[0];
}

}  // namespace

struct SyndromeFamily::TableCache {
  struct Entry {
    std::vector<BitString> leaders;  // indexed by packed syndrome
    std::vector<bool> present;
  };
  std::mutex mu;
  std::unordered_map<std::uint64_t, std::shared_ptr<const Entry>> tables;
};

SyndromeFamily::SyndromeFamily(std::uint64_t family_seed,
                               std::size_t family_size, std::size_t block_len,
                               std::size_t syndrome_len, double tau,
                               double delta_bound)
    : family_seed_(family_seed), family_size_(family_size),
      block_len_(block_len), syndrome_len_(syndrome_len), tau_(tau),
      delta_bound_(delta_bound), cache_(std::make_shared<TableCache>()) {
  if (family_size == 0) throw std::invalid_argument("SyndromeFamily: empty index set");
  if (block_len == 0) throw std::invalid_argument("SyndromeFamily: empty block");
  if (syndrome_len == 0 || syndrome_len > block_len)
    throw std::invalid_argument("SyndromeFamily: need 0 < syndrome_len <= block_len");
  if (tau <= 0.0 || tau >= 0.5)
    throw std::invalid_argument("SyndromeFamily: tau outside (0, 1/2)");
}

std::size_t SyndromeFamily::decode_radius() const {
  return static_cast<std::size_t>(tau_ * static_cast<double>(block_len_));
}

std::vector<BitString> SyndromeFamily::check_matrix(std::uint64_t j) const {
  if (j >= family_size_)
    throw std::invalid_argument("SyndromeFamily: index outside family");
  // Resample deterministically until the matrix has full rank, so every
  // syndrome value is reachable and the dual never contains 0 nontrivially.
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = Rng(family_seed_).split(j * 0x10001ULL + attempt);
    std::vector<BitString> rows;
    rows.reserve(syndrome_len_);
    for (std::size_t r = 0; r < syndrome_len_; ++r)
      rows.push_back(BitString::random(block_len_, rng));
    if (gf2_rank(rows) == syndrome_len_) return rows;
  }
}

BitString SyndromeFamily::syndrome(std::uint64_t j, const BitString& x) const {
  if (x.size() != block_len_)
    throw std::invalid_argument("SyndromeFamily: block length mismatch");
  const auto rows = check_matrix(j);
  BitString s(syndrome_len_);
  for (std::size_t r = 0; r < syndrome_len_; ++r) s.set(r, dot(rows[r], x));
  return s;
}

bool SyndromeFamily::table_feasible() const {
  return syndrome_len_ <= kTableSyndromeCap &&
         enumeration_volume(block_len_, decode_radius()) <= kTableVolumeCap;
}

std::optional<BitString> SyndromeFamily::decode(std::uint64_t j,
                                                const BitString& s,
                                                const BitString& x_hat) const {
  if (x_hat.size() != block_len_)
    throw std::invalid_argument("SyndromeFamily: block length mismatch");
  if (s.size() != syndrome_len_)
    throw std::invalid_argument("SyndromeFamily: syndrome length mismatch");

  const BitString target = syndrome(j, x_hat) ^ s;
  if (target.weight() == 0) return x_hat;

  const std::size_t radius = decode_radius();
  if (radius == 0) return std::nullopt;

  const auto rows = check_matrix(j);
  auto column_syndrome = [&](std::size_t c) {
    BitString col(syndrome_len_);
    for (std::size_t r = 0; r < syndrome_len_; ++r) col.set(r, rows[r].get(c));
    return col;
  };

  if (table_feasible()) {
    std::shared_ptr<const TableCache::Entry> table;
    {
      std::lock_guard<std::mutex> lock(cache_->mu);
      auto it = cache_->tables.find(j);
      if (it != cache_->tables.end()) table = it->second;
    }
    if (!table) {
      auto entry = std::make_shared<TableCache::Entry>();
      const std::size_t slots = std::size_t{1} << syndrome_len_;
      entry->leaders.assign(slots, BitString(block_len_));
      entry->present.assign(slots, false);
      entry->present[0] = true;  // zero pattern
      std::vector<BitString> cols;
      cols.reserve(block_len_);
      for (std::size_t c = 0; c < block_len_; ++c)
        cols.push_back(column_syndrome(c));
      std::vector<std::size_t> pick;
      // Enumerate error patterns by increasing weight; within a weight keep
      // the lexicographically smallest pattern per syndrome slot.
      for (std::size_t w = 1; w <= radius; ++w) {
        pick.resize(w);
        for (std::size_t i = 0; i < w; ++i) pick[i] = i;
        while (true) {
          BitString syn(syndrome_len_);
          for (std::size_t i = 0; i < w; ++i) syn = syn ^ cols[pick[i]];
          const std::uint64_t slot = pack_low_bits(syn);
          if (!entry->present[slot]) {
            BitString pat(block_len_);
            for (std::size_t i = 0; i < w; ++i) pat.set(pick[i], true);
            entry->leaders[slot] = std::move(pat);
            entry->present[slot] = true;
          } else if (entry->present[slot] && entry->leaders[slot].weight() == w) {
            BitString pat(block_len_);
            for (std::size_t i = 0; i < w; ++i) pat.set(pick[i], true);
            if (pat.lex_less(entry->leaders[slot]))
              entry->leaders[slot] = std::move(pat);
          }
          // next combination
          std::size_t i = w;
          while (i > 0 && pick[i - 1] == block_len_ - w + i - 1) --i;
          if (i == 0) break;
          ++pick[i - 1];
          for (std::size_t k = i; k < w; ++k) pick[k] = pick[k - 1] + 1;
        }
      }
      {
        std::lock_guard<std::mutex> lock(cache_->mu);
        if (cache_->tables.size() > 64) cache_->tables.clear();
        cache_->tables.emplace(j, entry);
      }
      table = entry;
    }
    const std::uint64_t slot = pack_low_bits(target);
    if (!table->present[slot]) return std::nullopt;
    return x_hat ^ table->leaders[slot];
  }

  // Above the table regime: exact scans for weight 1 and 2, then a bounded
  // greedy bit-flip search. The greedy stage is a heuristic; it never
  // returns a candidate outside the radius but may miss one.
  std::vector<BitString> cols;
  cols.reserve(block_len_);
  for (std::size_t c = 0; c < block_len_; ++c) cols.push_back(column_syndrome(c));

  std::optional<BitString> best;
  auto consider = [&](const BitString& pattern) {
    if (!best || pattern.lex_less(*best)) best = pattern;
  };
  for (std::size_t c = 0; c < block_len_; ++c) {
    if (cols[c] == target) {
      BitString pat(block_len_);
      pat.set(c, true);
      consider(pat);
    }
  }
  if (best) return x_hat ^ *best;

  if (radius >= 2 &&
      block_len_ * (block_len_ - 1) / 2 <= kPairScanCap) {
    for (std::size_t a = 0; a < block_len_; ++a) {
      const BitString partial = target ^ cols[a];
      for (std::size_t b = a + 1; b < block_len_; ++b) {
        if (cols[b] == partial) {
          BitString pat(block_len_);
          pat.set(a, true);
          pat.set(b, true);
          consider(pat);
        }
      }
    }
    if (best) return x_hat ^ *best;
  }

  if (radius >= 3) {
    BitString resid = target;
    BitString pattern(block_len_);
    for (std::size_t step = 0; step < radius; ++step) {
      std::size_t best_pos = block_len_;
      std::size_t best_weight = resid.weight();
      for (std::size_t c = 0; c < block_len_; ++c) {
        const std::size_t w = (resid ^ cols[c]).weight();
        if (w < best_weight) {
          best_weight = w;
          best_pos = c;
        }
      }
      if (best_pos == block_len_) break;  // no strict improvement
      resid = resid ^ cols[best_pos];
      pattern.set(best_pos, !pattern.get(best_pos));
      if (resid.weight() == 0) {
        if (pattern.weight() <= radius) return x_hat ^ pattern;
        break;
      }
    }
  }
  return std::nullopt;
}

std::pair<std::uint64_t, std::uint64_t> SyndromeFamily::bias_fraction() const {
  if (block_len_ > 20 || syndrome_len_ > 16 || family_size_ > 256)
    throw std::invalid_argument("SyndromeFamily: bias measurement is desk-scale only");
  const std::size_t space = std::size_t{1} << block_len_;
  std::vector<std::uint32_t> counts(space, 0);
  for (std::uint64_t j = 0; j < family_size_; ++j) {
    const auto rows = check_matrix(j);
    std::vector<std::uint64_t> packed(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      packed[r] = pack_low_bits(rows[r]);
    std::vector<bool> seen(space, false);
    for (std::uint64_t combo = 1; combo < (std::uint64_t{1} << syndrome_len_);
         ++combo) {
      std::uint64_t word = 0;
      for (std::size_t r = 0; r < syndrome_len_; ++r)
        if ((combo >> r) & 1) word ^= packed[r];
      if (word != 0 && !seen[word]) {
        seen[word] = true;
        ++counts[word];
      }
    }
  }
  std::uint32_t max_count = 0;
  for (std::size_t a = 1; a < space; ++a) max_count = std::max(max_count, counts[a]);
  return {max_count, family_size_};
}

double SyndromeFamily::empirical_bias() const {
  const auto [max_count, size] = bias_fraction();
  return std::sqrt(static_cast<double>(max_count) / static_cast<double>(size));
}

// ---------------------------------------------------------- password code

namespace {
std::size_t pairwise_min_distance(const std::vector<BitString>& table,
                                  std::size_t n) {
  if (table.size() <= 1) return n;
  std::size_t best = n;
  for (std::size_t a = 0; a < table.size(); ++a)
    for (std::size_t b = a + 1; b < table.size(); ++b)
      best = std::min(best, table[a].hamming(table[b]));
  return best;
}
}  // namespace

PasswordCode PasswordCode::random(std::uint64_t seed, std::size_t dict_size,
                                  std::size_t codeword_len, double gamma) {
  if (dict_size == 0) throw std::invalid_argument("PasswordCode: empty dictionary");
  if (codeword_len == 0) throw std::invalid_argument("PasswordCode: empty codewords");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("PasswordCode: gamma outside [0,1]");
  const auto required = static_cast<std::size_t>(
      std::ceil(gamma * static_cast<double>(codeword_len) - 1e-9));

  PasswordCode code;
  code.n_ = codeword_len;
  code.gamma_ = gamma;
  code.seed_ = seed;

  const bool verifiable = dict_size <= 4096;
  for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
    Rng rng = Rng(seed).split(attempt);
    std::vector<BitString> table;
    table.reserve(dict_size);
    for (std::size_t i = 0; i < dict_size; ++i)
      table.push_back(BitString::random(codeword_len, rng));
    if (!verifiable) {
      // Distance taken on faith from the random construction; flagged.
      code.table_ = std::move(table);
      code.min_distance_ = required;
      code.distance_verified_ = false;
      return code;
    }
    const std::size_t d = pairwise_min_distance(table, codeword_len);
    if (d >= required) {
      code.table_ = std::move(table);
      code.min_distance_ = d;
      code.distance_verified_ = true;
      return code;
    }
  }
  throw std::runtime_error("PasswordCode: could not reach requested distance");
}

PasswordCode PasswordCode::repetition(std::size_t codeword_len) {
  if (codeword_len == 0) throw std::invalid_argument("PasswordCode: empty codewords");
  PasswordCode code;
  code.n_ = codeword_len;
  code.gamma_ = 1.0;
  BitString all_plus(codeword_len);
  BitString all_times(codeword_len);
  for (std::size_t i = 0; i < codeword_len; ++i) all_times.set(i, true);
  code.table_ = {std::move(all_plus), std::move(all_times)};
  code.min_distance_ = codeword_len;
  code.distance_verified_ = true;
  return code;
}

PasswordCode PasswordCode::from_table(std::vector<BitString> table,
                                      double gamma) {
  if (table.empty()) throw std::invalid_argument("PasswordCode: empty dictionary");
  const std::size_t n = table[0].size();
  for (const auto& w : table)
    if (w.size() != n)
      throw std::invalid_argument("PasswordCode: ragged codeword table");
  PasswordCode code;
  code.n_ = n;
  code.gamma_ = gamma;
  code.table_ = std::move(table);
  if (code.table_.size() <= 4096) {
    code.min_distance_ = pairwise_min_distance(code.table_, n);
    code.distance_verified_ = true;
    const auto required = static_cast<std::size_t>(
        std::ceil(gamma * static_cast<double>(n) - 1e-9));
    if (code.min_distance_ < required)
      throw std::invalid_argument("PasswordCode: table violates distance bound");
  } else {
    code.min_distance_ = static_cast<std::size_t>(
        std::ceil(gamma * static_cast<double>(n) - 1e-9));
    code.distance_verified_ = false;
  }
  return code;
}

const BitString& PasswordCode::encode(std::size_t pw) const {
  if (pw >= table_.size())
    throw std::out_of_range("PasswordCode: password index outside dictionary");
  return table_[pw];
}

std::size_t PasswordCode::verify_min_distance() const {
  if (table_.size() > 4096)
    throw std::invalid_argument("PasswordCode: dictionary too large for exact scan");
  return pairwise_min_distance(table_, n_);
}

}  // namespace qpake
