#include "letsip/xor_system.hpp"

#include "letsip/errors.hpp"

namespace letsip {

bool XorConstraint::satisfied_by(const Itemset& p) const {
    bool acc = false;
    for (Item i : p) {
        if (i == 0 || i > coefficients.size()) throw DomainError("item outside XOR width");
        acc ^= coefficients.test(i - 1);
    }
    return acc == parity;
}

ReducedXors gauss_reduce(const std::vector<XorConstraint>& constraints,
                         const std::vector<int>& column_priority) {
    ReducedXors out;
    for (const XorConstraint& c : constraints) {
        ReducedRow row{c.coefficients, c.parity, 0};
        row.coefficients.for_each_set([&](std::size_t col) {
            if (column_priority[col] < 0) row.coefficients.set(col, false);
        });
        for (const ReducedRow& p : out.rows) {
            if (row.coefficients.test(p.pivot)) {
                row.coefficients ^= p.coefficients;
                row.parity ^= p.parity;
            }
        }
        int best = -1;
        row.coefficients.for_each_set([&](std::size_t col) {
            if (best < 0 || column_priority[col] > column_priority[static_cast<std::size_t>(best)]) {
                best = static_cast<int>(col);
            }
        });
        if (best < 0) {
            if (row.parity) out.consistent = false;
            continue;
        }
        row.pivot = static_cast<std::size_t>(best);
        for (ReducedRow& p : out.rows) {
            if (p.coefficients.test(row.pivot)) {
                p.coefficients ^= row.coefficients;
                p.parity ^= row.parity;
            }
        }
        out.rows.push_back(std::move(row));
    }
    if (!out.consistent) out.rows.clear();
    return out;
}

XorSystem::XorSystem(std::vector<XorConstraint> constraints, std::size_t item_count)
    : constraints_(std::move(constraints)), item_count_(item_count) {
    std::vector<int> priority(item_count);
    for (std::size_t i = 0; i < item_count; ++i) priority[i] = static_cast<int>(i);
    reduced_ = gauss_reduce(constraints_, priority);
}

XorSystem XorSystem::with_parities(std::uint64_t parity_bits) const {
    std::vector<XorConstraint> cs = constraints_;
    for (std::size_t r = 0; r < cs.size(); ++r) cs[r].parity = ((parity_bits >> r) & 1U) != 0;
    return XorSystem(std::move(cs), item_count_);
}

XorSystem draw_random_xors(std::size_t m, std::size_t item_count, Rng& rng) {
    std::vector<XorConstraint> cs;
    cs.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
        XorConstraint c{Bitset(item_count), false};
        for (std::size_t i = 0; i < item_count; ++i) c.coefficients.set(i, rng.coin());
        c.parity = rng.coin();
        cs.push_back(std::move(c));
    }
    return XorSystem(std::move(cs), item_count);
}

bool xor_satisfies(const XorSystem& xors, const Itemset& p) {
    for (const XorConstraint& c : xors.constraints()) {
        if (!c.satisfied_by(p)) return false;
    }
    return true;
}

}  // namespace letsip
