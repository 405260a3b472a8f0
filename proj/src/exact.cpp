#include "hodgex/exact.hpp"

#include <algorithm>
#include <vector>

#include <gmpxx.h>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseQR>

namespace hodgex {

namespace {

using Entry = std::pair<int, mpz_class>;  // (col, value), rows sorted by col

struct Elim {
    std::vector<std::vector<Entry>> rows;
    std::vector<char> active_row;
    std::vector<int> col_count;                // occurrences among active rows
    std::vector<std::vector<int>> col_rows;    // row ids, may contain stale ids

    void note_insert(int row, const std::vector<Entry>& r) {
        for (const auto& [c, v] : r) {
            col_count[c] += 1;
            col_rows[c].push_back(row);
        }
    }
    void note_remove(const std::vector<Entry>& r) {
        for (const auto& [c, v] : r) col_count[c] -= 1;
    }
};

// r_new = p * r - r_c * prow with the pivot column dropped, then divided by
// the content gcd. Row scaling never changes the rank, so this stays exact
// without any divisibility bookkeeping.
std::vector<Entry> eliminate_combine(const std::vector<Entry>& r, const mpz_class& rc,
                                     const std::vector<Entry>& prow, int pivot_col,
                                     const mpz_class& p) {
    std::vector<Entry> out;
    out.reserve(r.size() + prow.size());
    size_t i = 0, j = 0;
    mpz_class val, t1, t2, g = 0;
    while (i < r.size() || j < prow.size()) {
        int ci = (i < r.size()) ? r[i].first : INT32_MAX;
        int cj = (j < prow.size()) ? prow[j].first : INT32_MAX;
        int c = std::min(ci, cj);
        if (c == pivot_col) {
            if (ci == c) ++i;
            if (cj == c) ++j;
            continue;
        }
        t1 = 0;
        t2 = 0;
        if (ci == c) t1 = p * r[i++].second;
        if (cj == c) t2 = rc * prow[j++].second;
        val = t1 - t2;
        if (val == 0) continue;
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), val.get_mpz_t());
        out.emplace_back(c, val);
    }
    if (g > 1)
        for (auto& [c, v] : out)
            mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
    return out;
}

long run_elimination(Elim& E) {
    const int nrows = static_cast<int>(E.rows.size());
    long rank = 0;
    // rows currently active and nonempty
    while (true) {
        // pivot row: fewest entries, lowest id
        int prow_id = -1;
        size_t best = SIZE_MAX;
        for (int r = 0; r < nrows; ++r)
            if (E.active_row[r] && !E.rows[r].empty() && E.rows[r].size() < best) {
                best = E.rows[r].size();
                prow_id = r;
                if (best == 1) break;
            }
        if (prow_id < 0) break;
        // pivot column within the row: fewest active occurrences, then small value
        const auto& pr = E.rows[prow_id];
        int pcol = -1;
        long bestc = LONG_MAX;
        for (const auto& [c, v] : pr) {
            long score = 4L * E.col_count[c] + (mpz_cmpabs_ui(v.get_mpz_t(), 1) == 0 ? 0 : 2);
            if (score < bestc) {
                bestc = score;
                pcol = c;
            }
        }
        mpz_class p;
        for (const auto& [c, v] : pr)
            if (c == pcol) p = v;

        // eliminate pcol from all other active rows
        std::vector<int> targets;
        targets.swap(E.col_rows[pcol]);
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        for (int r : targets) {
            if (r == prow_id || !E.active_row[r]) continue;
            mpz_class rc = 0;
            for (const auto& [c, v] : E.rows[r])
                if (c == pcol) rc = v;
            if (rc == 0) continue;
            auto nr = eliminate_combine(E.rows[r], rc, pr, pcol, p);
            E.note_remove(E.rows[r]);
            E.rows[r] = std::move(nr);
            E.note_insert(r, E.rows[r]);
        }
        E.note_remove(pr);
        E.active_row[prow_id] = 0;
        E.rows[prow_id].clear();
        ++rank;
    }
    return rank;
}

}  // namespace

long exact_rank_restricted(const Eigen::SparseMatrix<long long>& A,
                           const std::vector<char>& drop_row,
                           const std::vector<char>& drop_col) {
    Elim E;
    E.rows.resize(A.rows());
    E.active_row.assign(A.rows(), 0);
    E.col_count.assign(A.cols(), 0);
    E.col_rows.resize(A.cols());
    for (int outer = 0; outer < A.outerSize(); ++outer)
        for (Eigen::SparseMatrix<long long>::InnerIterator it(A, outer); it; ++it) {
            int r = static_cast<int>(it.row());
            int c = static_cast<int>(it.col());
            if (!drop_row.empty() && drop_row[r]) continue;
            if (!drop_col.empty() && drop_col[c]) continue;
            if (it.value() == 0) continue;
            E.rows[r].emplace_back(c, mpz_class(static_cast<long>(it.value())));
            E.active_row[r] = 1;
        }
    for (int r = 0; r < static_cast<int>(E.rows.size()); ++r) {
        std::sort(E.rows[r].begin(), E.rows[r].end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        if (E.active_row[r]) E.note_insert(r, E.rows[r]);
    }
    return run_elimination(E);
}

long exact_rank(const Eigen::SparseMatrix<long long>& A) {
    return exact_rank_restricted(A, {}, {});
}

long float_rank(const Eigen::SparseMatrix<long long>& A, double rel_tol) {
    if (A.rows() == 0 || A.cols() == 0 || A.nonZeros() == 0) return 0;
    Eigen::SparseMatrix<double> Ad(A.rows(), A.cols());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros());
    for (int outer = 0; outer < A.outerSize(); ++outer)
        for (Eigen::SparseMatrix<long long>::InnerIterator it(A, outer); it; ++it)
            trip.emplace_back(it.row(), it.col(), static_cast<double>(it.value()));
    Ad.setFromTriplets(trip.begin(), trip.end());
    Ad.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(rel_tol);
    qr.compute(Ad);
    return static_cast<long>(qr.rank());
}

}  // namespace hodgex
