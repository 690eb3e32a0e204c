#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "letsip/bitset.hpp"

namespace letsip {

/// Item identifier, 1-based as in FIMI files.
using Item = std::uint32_t;
/// Absolute support count.
using Support = std::uint32_t;

enum class ClassLabel : std::uint8_t { Negative, Positive };

/// Sorted, duplicate-free set of item ids.
class Itemset {
public:
    Itemset() = default;
    Itemset(std::initializer_list<Item> items);
    explicit Itemset(std::vector<Item> items);

    const std::vector<Item>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    bool contains(Item i) const noexcept;

    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }

    Itemset with(Item i) const;

    /// Lexicographic on the sorted item sequence.
    friend auto operator<=>(const Itemset&, const Itemset&) = default;
    friend bool operator==(const Itemset&, const Itemset&) = default;

    std::string to_string() const;

private:
    std::vector<Item> items_;
};

struct ItemsetHash {
    std::size_t operator()(const Itemset& s) const noexcept;
};

/// Immutable bag of transactions over items 1..M, stored both row-wise
/// (one M-bit vector per transaction) and column-wise (one N-bit cover per item).
class TransactionDB {
public:
    TransactionDB(std::string name, std::vector<std::vector<Item>> transactions,
                  std::optional<std::vector<ClassLabel>> labels = std::nullopt,
                  std::size_t item_count = 0);

    const std::string& name() const noexcept { return name_; }
    std::size_t item_count() const noexcept { return item_count_; }
    std::size_t transaction_count() const noexcept { return rows_.size(); }

    const Bitset& transaction(std::size_t t) const { return rows_.at(t); }
    /// Transactions containing item i.
    const Bitset& item_cover(Item i) const;
    Support item_support(Item i) const { return static_cast<Support>(item_cover(i).count()); }

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::vector<ClassLabel>& labels() const;
    /// Transactions labelled +; only valid when labelled.
    const Bitset& positive_mask() const;
    /// (|D-|, |D+|)
    std::pair<Support, Support> class_sizes() const;

    const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
    /// Display name of an item, falling back to its id.
    std::string item_name(Item i) const;
    void set_vocabulary(std::vector<std::string> names) { vocabulary_ = std::move(names); }

private:
    std::string name_;
    std::size_t item_count_ = 0;
    std::vector<Bitset> rows_;
    std::vector<Bitset> columns_;
    std::optional<std::vector<ClassLabel>> labels_;
    Bitset positive_;
    std::vector<std::string> vocabulary_;  // index = item id; may be empty
};

/// Reads a FIMI .dat file and an optional companion label file (one 0/1 per line).
TransactionDB load_dataset(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& label_path = std::nullopt);

/// Reads "id<TAB>name" lines and attaches them to the database for display.
void load_vocabulary(TransactionDB& db, const std::filesystem::path& path);

/// Transactions containing every item of p.
Bitset cover(const TransactionDB& db, const Itemset& p);
Support support(const TransactionDB& db, const Itemset& p);
double freq_rel(const TransactionDB& db, const Itemset& p);
/// (support among -, support among +)
std::pair<Support, Support> class_supports(const TransactionDB& db, const Itemset& p);
std::pair<Support, Support> class_supports(const TransactionDB& db, const Bitset& cover);

}  // namespace letsip
