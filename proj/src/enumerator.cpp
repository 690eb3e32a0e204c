#include "letsip/enumerator.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "letsip/errors.hpp"

namespace letsip {

double Cell::total_weight() const noexcept { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

using Word = Bitset::Word;

/// Eclat over items in descending-support order. Each node is a pattern S;
/// its children extend S with a later item whose extension is still frequent.
///
/// XORs are reduced so that every row's pivot is the row's last item in
/// branching order. A row is therefore fully decided once the search moves
/// past its pivot, and `residual` holds, per row, the parity still owed by the
/// undecided items. Rows are sorted by pivot position, so the lowest set bit of
/// the residual names the first pivot that must be included; no child may skip
/// over it.
class EclatSearch {
public:
    EclatSearch(const TransactionDB& db, Support theta, const XorSystem* xors, const PatternVisitor& visit)
        : db_(db), theta_(theta), visit_(visit), words_((db.transaction_count() + 63) / 64) {
        for (Item i = 1; i <= db.item_count(); ++i) {
            if (db.item_support(i) >= theta) order_.push_back(i);
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [&](Item a, Item b) { return db.item_support(a) > db.item_support(b); });
        position_of_.assign(db.item_count(), -1);
        for (std::size_t p = 0; p < order_.size(); ++p) position_of_[order_[p] - 1] = static_cast<int>(p);

        pivot_row_at_.assign(order_.size(), -1);
        if (xors != nullptr && !xors->empty()) {
            if (xors->item_count() != db.item_count()) throw DomainError("XOR width does not match item count");
            ReducedXors red = gauss_reduce(xors->constraints(), position_of_);
            consistent_ = red.consistent;
            std::sort(red.rows.begin(), red.rows.end(), [&](const ReducedRow& a, const ReducedRow& b) {
                return position_of_[a.pivot] < position_of_[b.pivot];
            });
            rows_ = red.rows.size();
            row_words_ = std::max<std::size_t>(1, (rows_ + 63) / 64);
            row_mask_.assign(order_.size() * row_words_, 0);
            initial_residual_.assign(row_words_, 0);
            for (std::size_t r = 0; r < rows_; ++r) {
                const ReducedRow& row = red.rows[r];
                const auto pp = static_cast<std::size_t>(position_of_[row.pivot]);
                pivot_row_at_[pp] = static_cast<int>(r);
                row_pivot_pos_.push_back(pp);
                if (row.parity) initial_residual_[r / 64] |= Word{1} << (r % 64);
                row.coefficients.for_each_set([&](std::size_t col) {
                    const auto pos = static_cast<std::size_t>(position_of_[col]);
                    row_mask_[pos * row_words_ + r / 64] |= Word{1} << (r % 64);
                });
            }
        } else {
            row_words_ = 1;
            row_mask_.assign(order_.size(), 0);
            initial_residual_.assign(1, 0);
        }
    }

    EnumerationStats run() {
        const std::size_t n = db_.transaction_count();
        if (!consistent_ || theta_ > n) return stats_;

        const std::size_t f = order_.size();
        covers_.assign(f + 2, {});
        entries_.assign(f + 2, {});
        residuals_.assign((f + 2) * row_words_, 0);

        auto& root_covers = covers_[0];
        root_covers.resize(f * words_);
        for (std::size_t p = 0; p < f; ++p) {
            const Bitset& c = db_.item_cover(order_[p]);
            std::copy(c.data(), c.data() + words_, root_covers.begin() + static_cast<std::ptrdiff_t>(p * words_));
            entries_[0].push_back({p, static_cast<Support>(c.count()), p * words_});
        }
        std::vector<Word> all(words_, ~Word{0});
        Bitset full(n, true);
        std::copy(full.data(), full.data() + words_, all.begin());
        std::copy(initial_residual_.begin(), initial_residual_.end(), residuals_.begin());
        expand(0, all.data());
        return stats_;
    }

private:
    struct Entry {
        std::size_t pos;
        Support support;
        std::size_t offset;  // into covers_[level]
    };

    const Word* residual(std::size_t level) const { return residuals_.data() + level * row_words_; }
    Word* residual(std::size_t level) { return residuals_.data() + level * row_words_; }

    /// Branching position of the first row still owing parity, or npos.
    std::size_t first_open_pivot(const Word* res) const {
        for (std::size_t w = 0; w < row_words_; ++w) {
            if (res[w] != 0) return row_pivot_pos_[w * 64 + static_cast<std::size_t>(std::countr_zero(res[w]))];
        }
        return kNone;
    }

    void expand(std::size_t level, const Word* cover) {
        ++stats_.nodes;
        const Word* res = residual(level);
        const std::size_t blocking = first_open_pivot(res);
        if (blocking == kNone) {
            emit(cover);
            if (stopped_) return;
        }

        const std::vector<Entry>& tail = entries_[level];
        const std::vector<Word>& tail_covers = covers_[level];
        for (std::size_t a = 0; a < tail.size(); ++a) {
            const Entry& e = tail[a];
            if (e.pos > blocking) break;
            // A pivot whose row is already satisfied cannot be switched on.
            if (pivot_row_at_[e.pos] >= 0 && e.pos != blocking) continue;

            Word* child_res = residual(level + 1);
            const Word* mask = row_mask_.data() + e.pos * row_words_;
            for (std::size_t w = 0; w < row_words_; ++w) child_res[w] = res[w] ^ mask[w];

            const Word* child_cover = tail_covers.data() + e.offset;
            std::vector<Entry>& next = entries_[level + 1];
            std::vector<Word>& next_covers = covers_[level + 1];
            next.clear();
            next_covers.resize((tail.size() - a) * words_);
            std::size_t used = 0;
            for (std::size_t b = a + 1; b < tail.size(); ++b) {
                const Word* other = tail_covers.data() + tail[b].offset;
                Word* dst = next_covers.data() + used;
                Support sup = 0;
                for (std::size_t w = 0; w < words_; ++w) {
                    dst[w] = child_cover[w] & other[w];
                    sup += static_cast<Support>(std::popcount(dst[w]));
                }
                if (sup >= theta_) {
                    next.push_back({tail[b].pos, sup, used});
                    used += words_;
                }
            }

            stack_.push_back(order_[e.pos]);
            // The child reads its own cover from this level's buffer, which is
            // not touched until the loop advances.
            expand(level + 1, child_cover);
            stack_.pop_back();
            if (stopped_) return;
        }
    }

    void emit(const Word* cover) {
        ++stats_.patterns;
        Itemset p(std::vector<Item>(stack_.begin(), stack_.end()));
        Bitset c = Bitset::from_words(cover, db_.transaction_count());
        if (!visit_(p, c)) stopped_ = true;
    }

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    const TransactionDB& db_;
    Support theta_;
    const PatternVisitor& visit_;
    std::size_t words_;

    std::vector<Item> order_;
    std::vector<int> position_of_;  // by column (item - 1); -1 for infrequent items

    bool consistent_ = true;
    std::size_t rows_ = 0;
    std::size_t row_words_ = 1;
    std::vector<int> pivot_row_at_;          // by position
    std::vector<std::size_t> row_pivot_pos_;  // by row
    std::vector<Word> row_mask_;              // by position: rows containing it
    std::vector<Word> initial_residual_;

    std::vector<std::vector<Word>> covers_;
    std::vector<std::vector<Entry>> entries_;
    std::vector<Word> residuals_;
    std::vector<Item> stack_;
    bool stopped_ = false;
    EnumerationStats stats_;
};

}  // namespace

EnumerationStats for_each_frequent(const TransactionDB& db, Support theta, const XorSystem* xors,
                                   const PatternVisitor& visit) {
    if (theta < 1) throw ContractError("theta must be at least 1");
    EclatSearch search(db, theta, xors, visit);
    return search.run();
}

Cell enumerate_frequent(const TransactionDB& db, Support theta, const EnumerationOptions& options,
                        EnumerationStats* stats) {
    if (options.cap && *options.cap < 1) throw ContractError("cap must be at least 1");
    Cell cell;
    const std::size_t cap = options.cap.value_or(static_cast<std::size_t>(-1));
    auto visit = [&](const Itemset& p, const Bitset& c) {
        if (cell.patterns.size() == cap) {
            cell.truncated = true;
            return false;
        }
        const auto sup = static_cast<Support>(c.count());
        if (options.weight_fn != nullptr) cell.weights.push_back((*options.weight_fn)(p, c));
        cell.patterns.push_back({p, sup});
        return true;
    };
    EnumerationStats s = for_each_frequent(db, theta, options.xors, visit);
    if (stats != nullptr) *stats = s;
    return cell;
}

std::shared_ptr<const PatternSpace> PatternSpace::build(const TransactionDB& db, Support theta) {
    auto space = std::make_shared<PatternSpace>();
    space->theta_ = theta;
    for_each_frequent(db, theta, nullptr, [&](const Itemset& p, const Bitset& c) {
        Bitset bits(db.item_count());
        for (Item i : p) bits.set(i - 1);
        space->patterns_.push_back({p, static_cast<Support>(c.count())});
        space->covers_.push_back(c);
        space->item_bits_.push_back(std::move(bits));
        return true;
    });
    return space;
}

std::vector<std::size_t> PatternSpace::cell_indices(const XorSystem& xors) const {
    std::vector<std::size_t> out;
    const auto& rows = xors.constraints();
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
        bool ok = true;
        for (const XorConstraint& r : rows) {
            const bool parity = (Bitset::intersect_count(item_bits_[i], r.coefficients) & 1U) != 0;
            if (parity != r.parity) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(i);
    }
    return out;
}

}  // namespace letsip
