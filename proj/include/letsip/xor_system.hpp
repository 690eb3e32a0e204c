#pragma once

#include <cstdint>
#include <vector>

#include "letsip/bitset.hpp"
#include "letsip/data.hpp"
#include "letsip/rng.hpp"

namespace letsip {

/// One parity constraint over items: sum of coefficient_i * [i in p] = parity (mod 2).
struct XorConstraint {
    Bitset coefficients;  // bit (i - 1) for item i
    bool parity = false;

    bool satisfied_by(const Itemset& p) const;
};

/// A row of a reduced system: its pivot column has the highest priority among
/// the row's columns and appears in no other row.
struct ReducedRow {
    Bitset coefficients;
    bool parity = false;
    std::size_t pivot = 0;  // column index (item - 1)
};

struct ReducedXors {
    std::vector<ReducedRow> rows;
    bool consistent = true;
};

/// Gauss-Jordan elimination over GF(2). Columns with negative priority are
/// treated as fixed to zero and dropped. Pivots are chosen as the
/// highest-priority column of each row.
ReducedXors gauss_reduce(const std::vector<XorConstraint>& constraints,
                         const std::vector<int>& column_priority);

/// m random XOR constraints identifying one cell of a 2^m partition.
class XorSystem {
public:
    XorSystem() = default;
    XorSystem(std::vector<XorConstraint> constraints, std::size_t item_count);

    const std::vector<XorConstraint>& constraints() const noexcept { return constraints_; }
    std::size_t size() const noexcept { return constraints_.size(); }
    bool empty() const noexcept { return constraints_.empty(); }
    std::size_t item_count() const noexcept { return item_count_; }

    /// Reduced form with pivots on the highest item ids.
    const ReducedXors& reduced() const noexcept { return reduced_; }
    std::size_t rank() const noexcept { return reduced_.rows.size(); }
    /// False when the system implies 0 = 1, i.e. the cell is empty.
    bool consistent() const noexcept { return reduced_.consistent; }

    /// Same coefficients with different parity bits, for partition checks.
    XorSystem with_parities(std::uint64_t parity_bits) const;

private:
    std::vector<XorConstraint> constraints_;
    std::size_t item_count_ = 0;
    ReducedXors reduced_;
};

/// Every coefficient and parity bit is an independent fair coin.
XorSystem draw_random_xors(std::size_t m, std::size_t item_count, Rng& rng);

bool xor_satisfies(const XorSystem& xors, const Itemset& p);

}  // namespace letsip
