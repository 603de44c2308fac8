#include "tascl/decoders.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "tascl/errors.hpp"

namespace tascl {

Bits update_partial_sums(std::span<const std::uint8_t> u_block) {
  Bits ps(u_block.begin(), u_block.end());
  polar_transform(ps);
  return ps;
}

namespace {

void check_length(std::span<const Llr> llr, const PolarCode& code) {
  if (llr.size() != code.N())
    throw ParameterError("LLR vector length must equal N");
}

class ScDecoder {
public:
  ScDecoder(const PolarCode& code, const std::optional<QuantSpec>& quant)
      : code_(code), limit_(quant ? quant->max_signed() : HUGE_VAL), u_(code.N()) {}

  Bits run(std::span<const Llr> llr) {
    Bits x(llr.size());
    descend(std::vector<Llr>(llr.begin(), llr.end()), 0, x);
    return u_;
  }

private:
  void descend(const std::vector<Llr>& llr, std::size_t first, std::span<std::uint8_t> x) {
    const std::size_t m = llr.size();
    if (m == 1) {
      u_[first] = hard_decision(llr[0], first, code_);
      x[0] = u_[first];
      return;
    }
    const std::size_t half = m / 2;
    std::vector<Llr> child(half);
    for (std::size_t j = 0; j < half; ++j)
      child[j] = f_node(llr[j], llr[j + half]);
    descend(child, first, x.first(half));
    for (std::size_t j = 0; j < half; ++j)
      child[j] = std::clamp(g_node(llr[j], llr[j + half], x[j]), -limit_, limit_);
    descend(child, first + half, x.subspan(half));
    for (std::size_t j = 0; j < half; ++j)
      x[j] ^= x[j + half];
  }

  const PolarCode& code_;
  double limit_;
  Bits u_;
};

// Fixed-width arrays shared between paths by reference count.
template <typename T>
class ArrayPool {
public:
  ArrayPool(std::size_t width, std::size_t count) : width_(width), mem_(width * count), refs_(count, 0) {
    free_.reserve(count);
    for (std::size_t k = count; k-- > 0;)
      free_.push_back(static_cast<std::uint32_t>(k));
  }

  std::uint32_t acquire() {
    if (free_.empty())
      throw InvariantViolation("list decoder array pool exhausted");
    const auto k = free_.back();
    free_.pop_back();
    refs_[k] = 1;
    return k;
  }
  void share(std::uint32_t k) { ++refs_[k]; }
  void release(std::uint32_t k) {
    if (--refs_[k] == 0)
      free_.push_back(k);
  }
  // Gives the caller a private array; contents are unspecified when a
  // fresh one had to be taken.
  void make_private(std::uint32_t& k) {
    if (refs_[k] > 1) {
      --refs_[k];
      k = acquire();
    }
  }
  T* data(std::uint32_t k) { return mem_.data() + static_cast<std::size_t>(k) * width_; }

private:
  std::size_t width_;
  std::vector<T> mem_;
  std::vector<std::uint32_t> refs_;
  std::vector<std::uint32_t> free_;
};

class ListDecoder {
public:
  ListDecoder(const PolarCode& code, std::size_t list_size, const SclOptions& options)
      : code_(code), n_(static_cast<std::size_t>(code.n())), N_(code.N()), L_(list_size), options_(options) {
    if (list_size == 0)
      throw ParameterError("list size must be at least 1");
    if (options.fixed_point) {
      options.fixed_point->llr.validate();
      options.fixed_point->pm.validate();
      llr_limit_ = options.fixed_point->llr.max_signed();
      pm_limit_ = options.fixed_point->pm.max_unsigned();
      pm_step_ = options.fixed_point->pm.step();
    }
    for (std::size_t s = 0; s < n_; ++s) {
      llr_pool_.emplace_back(std::size_t{1} << s, L_);
      ps_pool_.emplace_back(std::size_t{1} << s, L_);
    }
  }

  SclDecodeResult run(std::span<const Llr> llr);

private:
  struct Path {
    std::vector<std::uint32_t> llr;
    std::vector<std::uint32_t> ps;
    double metric = 0.0;
  };

  double add_metric(double metric, double increment) {
    if (!options_.fixed_point)
      return metric + increment;
    const double sum = metric + std::round(increment / pm_step_) * pm_step_;
    if (sum > pm_limit_) {
      ++pm_saturations_;
      return pm_limit_;
    }
    return sum;
  }

  Path clone(const Path& p) {
    for (std::size_t s = 0; s < n_; ++s) {
      llr_pool_[s].share(p.llr[s]);
      ps_pool_[s].share(p.ps[s]);
    }
    return p;
  }

  void drop(const Path& p) {
    for (std::size_t s = 0; s < n_; ++s) {
      llr_pool_[s].release(p.llr[s]);
      ps_pool_[s].release(p.ps[s]);
    }
  }

  Llr leaf_llr(Path& p, std::size_t i);
  void push_bit(Path& p, std::size_t i, std::uint8_t bit);

  const PolarCode& code_;
  std::size_t n_;
  std::size_t N_;
  std::size_t L_;
  const SclOptions& options_;
  double llr_limit_ = HUGE_VAL;
  double pm_limit_ = HUGE_VAL;
  double pm_step_ = 1.0;
  std::uint64_t pm_saturations_ = 0;
  std::vector<Llr> channel_;
  std::vector<ArrayPool<Llr>> llr_pool_;
  std::vector<ArrayPool<std::uint8_t>> ps_pool_;
  std::vector<std::uint8_t> enc_;
  std::vector<std::uint8_t> tmp_;
};

// Refreshes the stages whose subtree changed between leaves i-1 and i.
Llr ListDecoder::leaf_llr(Path& p, std::size_t i) {
  if (n_ == 0)
    return channel_[0];
  const std::size_t top = i == 0 ? n_ - 1 : static_cast<std::size_t>(std::countr_zero(i));
  for (std::size_t c = top + 1; c-- > 0;) {
    llr_pool_[c].make_private(p.llr[c]);
    Llr* child = llr_pool_[c].data(p.llr[c]);
    const Llr* parent = c + 1 == n_ ? channel_.data() : llr_pool_[c + 1].data(p.llr[c + 1]);
    const std::size_t half = std::size_t{1} << c;
    if (((i >> c) & 1U) == 0) {
      for (std::size_t j = 0; j < half; ++j)
        child[j] = f_node(parent[j], parent[j + half]);
    } else {
      const std::uint8_t* ps = ps_pool_[c].data(p.ps[c]);
      for (std::size_t j = 0; j < half; ++j)
        child[j] = std::clamp(g_node(parent[j], parent[j + half], ps[j]), -llr_limit_, llr_limit_);
    }
  }
  return llr_pool_[0].data(p.llr[0])[0];
}

// Folds bit i into the encoded left-sibling blocks.
void ListDecoder::push_bit(Path& p, std::size_t i, std::uint8_t bit) {
  enc_.assign(1, bit);
  std::size_t t = 0;
  while (t < n_ && ((i >> t) & 1U) != 0) {
    const std::uint8_t* left = ps_pool_[t].data(p.ps[t]);
    const std::size_t w = enc_.size();
    tmp_.resize(2 * w);
    for (std::size_t j = 0; j < w; ++j) {
      tmp_[j] = left[j] ^ enc_[j];
      tmp_[j + w] = enc_[j];
    }
    enc_.swap(tmp_);
    ++t;
  }
  if (t < n_) {
    ps_pool_[t].make_private(p.ps[t]);
    std::copy(enc_.begin(), enc_.end(), ps_pool_[t].data(p.ps[t]));
  }
}

SclDecodeResult ListDecoder::run(std::span<const Llr> llr) {
  channel_.assign(llr.begin(), llr.end());
  if (options_.fixed_point)
    channel_ = quantize(channel_, options_.fixed_point->llr);

  std::vector<Path> paths(1);
  paths[0].llr.resize(n_);
  paths[0].ps.resize(n_);
  for (std::size_t s = 0; s < n_; ++s) {
    paths[0].llr[s] = llr_pool_[s].acquire();
    paths[0].ps[s] = ps_pool_[s].acquire();
  }

  // Per leaf and slot: decided bit and the slot it was extended from.
  std::vector<std::uint8_t> hist_bit(N_ * L_);
  std::vector<std::uint32_t> hist_parent(N_ * L_);
  std::vector<Llr> lam;
  std::vector<double> expanded;
  std::vector<std::size_t> order;
  std::vector<std::size_t> kept;

  for (std::size_t i = 0; i < N_; ++i) {
    lam.resize(paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l)
      lam[l] = leaf_llr(paths[l], i);

    if (code_.is_frozen(i)) {
      for (std::size_t l = 0; l < paths.size(); ++l) {
        if (theta(lam[l]))
          paths[l].metric = add_metric(paths[l].metric, std::abs(lam[l]));
        hist_bit[i * L_ + l] = 0;
        hist_parent[i * L_ + l] = static_cast<std::uint32_t>(l);
        push_bit(paths[l], i, 0);
      }
      continue;
    }

    const std::size_t count = 2 * paths.size();
    expanded.resize(count);
    for (std::size_t l = 0; l < paths.size(); ++l) {
      expanded[2 * l] = paths[l].metric;
      expanded[2 * l + 1] = add_metric(paths[l].metric, std::abs(lam[l]));
    }
    order.resize(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(count, L_);
    if (keep < count) {
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          return expanded[a] != expanded[b] ? expanded[a] < expanded[b] : a < b;
                        });
      order.resize(keep);
      std::sort(order.begin(), order.end());
    }
    kept = order;
    if (options_.on_prune)
      options_.on_prune(expanded, kept);

    std::vector<Path> next;
    next.reserve(keep);
    for (std::size_t slot = 0; slot < keep; ++slot) {
      const std::size_t cand = kept[slot];
      const std::size_t parent = cand / 2;
      next.push_back(clone(paths[parent]));
      next.back().metric = expanded[cand];
      hist_bit[i * L_ + slot] = static_cast<std::uint8_t>(theta(lam[parent]) ^ (cand & 1U));
      hist_parent[i * L_ + slot] = static_cast<std::uint32_t>(parent);
    }
    for (const auto& p : paths)
      drop(p);
    paths = std::move(next);
    for (std::size_t slot = 0; slot < paths.size(); ++slot)
      push_bit(paths[slot], i, hist_bit[i * L_ + slot]);
  }

  SclDecodeResult result;
  result.pm_saturations = pm_saturations_;
  result.candidates.resize(paths.size());
  for (std::size_t l = 0; l < paths.size(); ++l) {
    auto& cand = result.candidates[l];
    cand.u.resize(N_);
    std::size_t slot = l;
    for (std::size_t i = N_; i-- > 0;) {
      cand.u[i] = hist_bit[i * L_ + slot];
      slot = hist_parent[i * L_ + slot];
    }
    cand.metric = paths[l].metric;
    cand.crc_pass = check_crc(code_, extract_info(code_, cand.u));
  }
  for (const auto& p : paths)
    drop(p);

  std::stable_sort(result.candidates.begin(), result.candidates.end(),
                   [](const ListCandidate& a, const ListCandidate& b) { return a.metric < b.metric; });
  const auto hit = std::find_if(result.candidates.begin(), result.candidates.end(),
                                [](const ListCandidate& c) { return c.crc_pass; });
  result.passed_crc = hit != result.candidates.end();
  result.selected = result.passed_crc ? static_cast<std::size_t>(hit - result.candidates.begin()) : 0;
  return result;
}

} // namespace

Bits sc_decode(std::span<const Llr> llr, const PolarCode& code, const std::optional<QuantSpec>& quant) {
  check_length(llr, code);
  if (!quant)
    return ScDecoder(code, quant).run(llr);
  quant->validate();
  return ScDecoder(code, quant).run(quantize(llr, *quant));
}

SclDecodeResult scl_decode(std::span<const Llr> llr, const PolarCode& code, std::size_t list_size,
                           const SclOptions& options) {
  check_length(llr, code);
  return ListDecoder(code, list_size, options).run(llr);
}

std::size_t AsclResult::list_size_sum() const { return std::accumulate(attempted.begin(), attempted.end(), std::size_t{0}); }

AsclResult ascl_decode(std::span<const Llr> llr, const PolarCode& code, std::size_t max_list, AsclVariant variant,
                       const SclOptions& options) {
  if (max_list == 0)
    throw ParameterError("maximum list size must be at least 1");
  if (variant == AsclVariant::original && !std::has_single_bit(max_list))
    throw ParameterError("maximum list size must be a power of two");
  AsclResult out;
  std::size_t list = 1;
  for (;;) {
    out.result = scl_decode(llr, code, list, options);
    out.attempted.push_back(list);
    if (out.result.passed_crc || list >= max_list)
      break;
    list = variant == AsclVariant::original ? 2 * list : max_list;
  }
  return out;
}

} // namespace tascl
