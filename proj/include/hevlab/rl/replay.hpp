#pragma once

#include <random>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/ml/core.hpp"

namespace hevlab::rl {

using ml::Mat;
using ml::Vec;

struct Transition {
    Vec s;
    Vec a;
    double r = 0.0;
    Vec s_next;
    bool done = false;
};

/// Columns are samples.
struct Batch {
    Mat s;
    Mat a;
    Vec r;
    Mat s_next;
    Vec done; ///< 1 for terminal transitions
    [[nodiscard]] Eigen::Index size() const noexcept { return r.size(); }
};

/// Fixed-capacity FIFO: once full, each push overwrites the oldest tuple.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
        : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim)
    {
        if (capacity == 0 || state_dim <= 0 || action_dim <= 0) {
            throw ValidationError("ReplayBuffer: capacity and dimensions must be positive");
        }
    }

    void push(Transition t)
    {
        if (t.s.size() != state_dim_ || t.s_next.size() != state_dim_ || t.a.size() != action_dim_) {
            throw DimensionError("ReplayBuffer: transition shape does not match the buffer");
        }
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
        }
        head_ = (head_ + 1) % capacity_;
    }

    /// Uniform with replacement over the current contents.
    Batch sample(std::size_t n, std::mt19937_64& rng) const
    {
        if (data_.empty()) {
            throw StateError("ReplayBuffer: cannot sample from an empty buffer");
        }
        std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) {
            i = pick(rng);
        }
        return gather(idx);
    }

    [[nodiscard]] Batch gather(const std::vector<std::size_t>& idx) const
    {
        const auto n = static_cast<Eigen::Index>(idx.size());
        Batch b{Mat(state_dim_, n), Mat(action_dim_, n), Vec(n), Mat(state_dim_, n), Vec(n)};
        for (Eigen::Index j = 0; j < n; ++j) {
            const Transition& t = data_.at(idx[static_cast<std::size_t>(j)]);
            b.s.col(j) = t.s;
            b.a.col(j) = t.a;
            b.r[j] = t.r;
            b.s_next.col(j) = t.s_next;
            b.done[j] = t.done ? 1.0 : 0.0;
        }
        return b;
    }

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] const Transition& at(std::size_t i) const { return data_.at(i); }

private:
    std::size_t capacity_;
    int state_dim_;
    int action_dim_;
    std::vector<Transition> data_;
    std::size_t head_ = 0;
};

} // namespace hevlab::rl
