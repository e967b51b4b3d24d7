#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gcf {

/**
 * Space-saving heavy-hitters counter (Metwally et al.).
 *
 * Tracks at most `capacity` keys. Incrementing an untracked key when full
 * evicts the key with the smallest count (ties: smallest key) and takes over
 * its count, so reported counts never underestimate; the overestimate of a
 * key is at most its recorded `error`. Without a capacity the counter is exact.
 */
template <typename Key, typename Hash = std::hash<Key>> class SpaceSavingCounter {
public:
    struct Entry {
        std::uint64_t count = 0;
        std::uint64_t error = 0;
    };

    struct Increment {
        std::uint64_t count = 0;
        bool inserted = false;
        std::optional<Key> evicted;
    };

    explicit SpaceSavingCounter(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {
        if (capacity_ && *capacity_ == 0)
            throw std::invalid_argument("space-saving capacity must be positive");
    }

    bool exact() const noexcept { return !capacity_; }
    std::optional<std::size_t> capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return entries_.size(); }

    Increment increment(const Key &key) {
        Increment out;
        if (auto it = entries_.find(key); it != entries_.end()) {
            if (capacity_)
                order_.erase({it->second.count, key});
            ++it->second.count;
            if (capacity_)
                order_.insert({it->second.count, key});
            out.count = it->second.count;
            return out;
        }
        Entry entry{1, 0};
        if (capacity_ && entries_.size() >= *capacity_) {
            auto victim = order_.begin();
            entry.count = victim->first + 1;
            entry.error = victim->first;
            out.evicted = victim->second;
            entries_.erase(victim->second);
            order_.erase(victim);
        }
        entries_.emplace(key, entry);
        if (capacity_)
            order_.insert({entry.count, key});
        out.count = entry.count;
        out.inserted = true;
        return out;
    }

    /// Reported count, 0 when untracked.
    std::uint64_t count(const Key &key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.count;
    }

    std::optional<Entry> find(const Key &key) const {
        auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        return it->second;
    }

    /// Smallest tracked count (0 when empty).
    std::uint64_t min_count() const {
        if (entries_.empty())
            return 0;
        if (capacity_)
            return order_.begin()->first;
        std::uint64_t m = ~std::uint64_t{0};
        for (const auto &[k, e] : entries_)
            m = std::min(m, e.count);
        return m;
    }

    /// Up to `n` entries by count descending, ties by key ascending.
    std::vector<std::pair<Key, Entry>> top(std::size_t n) const {
        std::vector<std::pair<Key, Entry>> all(entries_.begin(), entries_.end());
        std::sort(all.begin(), all.end(), [](const auto &a, const auto &b) {
            if (a.second.count != b.second.count)
                return a.second.count > b.second.count;
            return a.first < b.first;
        });
        if (all.size() > n)
            all.resize(n);
        return all;
    }

    /// Inserts a tracked entry verbatim (checkpoint restore).
    void restore(const Key &key, Entry entry) {
        if (entries_.count(key))
            throw std::invalid_argument("duplicate key in counter restore");
        if (capacity_ && entries_.size() >= *capacity_)
            throw std::invalid_argument("counter restore exceeds capacity");
        entries_.emplace(key, entry);
        if (capacity_)
            order_.insert({entry.count, key});
    }

    template <typename Fn> void for_each(Fn &&fn) const {
        for (const auto &[k, e] : entries_)
            fn(k, e);
    }

private:
    std::optional<std::size_t> capacity_;
    std::unordered_map<Key, Entry, Hash> entries_;
    std::set<std::pair<std::uint64_t, Key>> order_;
};

} // namespace gcf
