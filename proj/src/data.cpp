#include "letsip/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "letsip/errors.hpp"

namespace letsip {

Itemset::Itemset(std::initializer_list<Item> items) : Itemset(std::vector<Item>(items)) {}

Itemset::Itemset(std::vector<Item> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool Itemset::contains(Item i) const noexcept {
    return std::binary_search(items_.begin(), items_.end(), i);
}

Itemset Itemset::with(Item i) const {
    std::vector<Item> v = items_;
    v.push_back(i);
    return Itemset(std::move(v));
}

std::string Itemset::to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < items_.size(); ++k) {
        if (k != 0) s += ' ';
        s += std::to_string(items_[k]);
    }
    return s + "}";
}

std::size_t ItemsetHash::operator()(const Itemset& s) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Item i : s) {
        h ^= i + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

TransactionDB::TransactionDB(std::string name, std::vector<std::vector<Item>> transactions,
                             std::optional<std::vector<ClassLabel>> labels, std::size_t item_count)
    : name_(std::move(name)), labels_(std::move(labels)) {
    if (transactions.empty()) throw DomainError("dataset has no transactions");
    Item max_item = 0;
    for (const auto& t : transactions) {
        for (Item i : t) {
            if (i == 0) throw DomainError("item ids are positive");
            max_item = std::max(max_item, i);
        }
    }
    item_count_ = std::max<std::size_t>(item_count, max_item);
    if (item_count_ == 0) throw DomainError("dataset has no items");
    if (labels_ && labels_->size() != transactions.size()) {
        throw ConsistencyError("label count " + std::to_string(labels_->size()) +
                               " does not match transaction count " +
                               std::to_string(transactions.size()));
    }

    const std::size_t n = transactions.size();
    rows_.reserve(n);
    columns_.assign(item_count_, Bitset(n));
    for (std::size_t t = 0; t < n; ++t) {
        Bitset row(item_count_);
        for (Item i : transactions[t]) {
            row.set(i - 1);
            columns_[i - 1].set(t);
        }
        rows_.push_back(std::move(row));
    }
    if (labels_) {
        positive_ = Bitset(n);
        for (std::size_t t = 0; t < n; ++t) {
            if ((*labels_)[t] == ClassLabel::Positive) positive_.set(t);
        }
    }
}

const Bitset& TransactionDB::item_cover(Item i) const {
    if (i == 0 || i > item_count_) throw DomainError("unknown item id " + std::to_string(i));
    return columns_[i - 1];
}

const std::vector<ClassLabel>& TransactionDB::labels() const {
    if (!labels_) throw StateError("dataset '" + name_ + "' has no class labels");
    return *labels_;
}

const Bitset& TransactionDB::positive_mask() const {
    if (!labels_) throw StateError("dataset '" + name_ + "' has no class labels");
    return positive_;
}

std::pair<Support, Support> TransactionDB::class_sizes() const {
    const auto pos = static_cast<Support>(positive_mask().count());
    return {static_cast<Support>(transaction_count()) - pos, pos};
}

std::string TransactionDB::item_name(Item i) const {
    if (i < vocabulary_.size() && !vocabulary_[i].empty()) return vocabulary_[i];
    return std::to_string(i);
}

namespace {

std::string stem_of(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace

TransactionDB load_dataset(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& label_path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file " + path.string());

    std::vector<std::vector<Item>> transactions;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<Item> t;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p == end) break;
            Item v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t')) {
                throw ParseError(path.string() + ": expected a positive integer item id", lineno);
            }
            if (v == 0) throw ParseError(path.string() + ": item ids must be positive", lineno);
            t.push_back(v);
            p = next;
        }
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        transactions.push_back(std::move(t));
    }
    if (transactions.empty()) throw ParseError(path.string() + ": no transactions");

    std::optional<std::vector<ClassLabel>> labels;
    if (label_path) {
        std::ifstream lin(*label_path);
        if (!lin) throw ParseError("cannot open label file " + label_path->string());
        std::vector<ClassLabel> ls;
        std::size_t ln = 0;
        while (std::getline(lin, line)) {
            ++ln;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::istringstream ss(line);
            std::string tok;
            if (!(ss >> tok)) continue;
            if (tok == "0") {
                ls.push_back(ClassLabel::Negative);
            } else if (tok == "1") {
                ls.push_back(ClassLabel::Positive);
            } else {
                throw ParseError(label_path->string() + ": label must be 0 or 1", ln);
            }
        }
        if (ls.size() != transactions.size()) {
            throw ConsistencyError("label file has " + std::to_string(ls.size()) +
                                   " entries but dataset has " +
                                   std::to_string(transactions.size()) + " transactions");
        }
        labels = std::move(ls);
    }
    return TransactionDB(stem_of(path), std::move(transactions), std::move(labels));
}

void load_vocabulary(TransactionDB& db, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open vocabulary file " + path.string());
    std::vector<std::string> names(db.item_count() + 1);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path.string() + ": expected id<TAB>name", lineno);
        Item id = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, id);
        if (ec != std::errc() || ptr != line.data() + tab || id == 0 || id > db.item_count()) {
            throw ParseError(path.string() + ": bad item id", lineno);
        }
        names[id] = line.substr(tab + 1);
    }
    db.set_vocabulary(std::move(names));
}

Bitset cover(const TransactionDB& db, const Itemset& p) {
    Bitset c(db.transaction_count(), true);
    for (Item i : p) c &= db.item_cover(i);
    return c;
}

Support support(const TransactionDB& db, const Itemset& p) {
    return static_cast<Support>(cover(db, p).count());
}

double freq_rel(const TransactionDB& db, const Itemset& p) {
    return static_cast<double>(support(db, p)) / static_cast<double>(db.transaction_count());
}

std::pair<Support, Support> class_supports(const TransactionDB& db, const Bitset& c) {
    const auto pos = static_cast<Support>(Bitset::intersect_count(c, db.positive_mask()));
    return {static_cast<Support>(c.count()) - pos, pos};
}

std::pair<Support, Support> class_supports(const TransactionDB& db, const Itemset& p) {
    return class_supports(db, cover(db, p));
}

}  // namespace letsip
