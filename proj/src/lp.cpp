#include "ncp/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <queue>

namespace ncp::lp {

namespace {

constexpr double kEps = 1e-7;
constexpr double kCostEps = 1e-9;

// Dense bounded-variable simplex working on one equality system
//   [A | I_slack | I_art] y = b
// with slack bounds encoding the row relations and artificials absorbing the
// initial residuals in phase 1.
class Tableau {
public:
    Tableau(const Problem& p, const std::vector<int>& active, const std::vector<double>& lo,
            const std::vector<double>& hi) {
        m_ = static_cast<int>(active.size());
        n_struct_ = p.num_vars();
        n_ = n_struct_ + m_ + m_;  // structurals, slacks, artificials
        lo_.assign(n_, 0.0);
        hi_.assign(n_, kInf);
        cost_.assign(n_, 0.0);
        for (int j = 0; j < n_struct_; ++j) {
            lo_[j] = lo[j];
            hi_[j] = hi[j];
            if (!std::isfinite(lo_[j])) throw LpError("finite lower bounds required");
            cost_[j] = p.objective[j];
        }

        t_.assign(m_, std::vector<double>(n_ + 1, 0.0));
        for (int i = 0; i < m_; ++i) {
            const Row& row = p.rows[active[i]];
            double sign = (row.rel == Rel::kGe) ? -1.0 : 1.0;  // normalize >= to <=
            for (const Term& tm : row.terms) t_[i][tm.var] += sign * tm.coeff;
            t_[i][n_] = sign * row.rhs;
            int slack = n_struct_ + i;
            t_[i][slack] = 1.0;
            if (row.rel == Rel::kEq) hi_[slack] = 0.0;  // pinned slack
        }

        // Nonbasic start at lower bounds. A row whose slack can absorb the
        // residual starts with the slack basic; only the rest get a basic
        // artificial.
        val_.assign(n_, 0.0);
        state_.assign(n_, kAtLower);
        for (int j = 0; j < n_struct_; ++j) val_[j] = lo_[j];
        basis_.resize(m_);
        beta_.resize(m_);
        need_phase1_ = false;
        for (int i = 0; i < m_; ++i) {
            double r = t_[i][n_];
            for (int j = 0; j < n_struct_; ++j) r -= t_[i][j] * val_[j];
            int slack = n_struct_ + i;
            int art = n_struct_ + m_ + i;
            if (r >= 0 && r <= hi_[slack]) {
                hi_[art] = 0.0;
                basis_[i] = slack;
                beta_[i] = r;
                state_[slack] = kBasic;
                continue;
            }
            if (r < 0) {
                for (int j = 0; j <= n_; ++j) t_[i][j] = -t_[i][j];
                r = -r;
            }
            t_[i][art] = 1.0;
            basis_[i] = art;
            beta_[i] = r;
            state_[art] = kBasic;
            need_phase1_ = true;
        }
    }

    LpStatus optimize(long iter_limit) {
        if (need_phase1_) {
            // Phase 1: drive the artificials to zero.
            std::vector<double> phase1(n_, 0.0);
            for (int i = 0; i < m_; ++i) phase1[n_struct_ + m_ + i] = 1.0;
            LpStatus s = run(phase1, iter_limit);
            if (s != LpStatus::kOptimal)
                return s == LpStatus::kUnbounded ? LpStatus::kInfeasible : s;
            if (objective_value(phase1) > 1e-6) return LpStatus::kInfeasible;
            // Artificials may linger in the basis at zero; pin them there.
            for (int i = 0; i < m_; ++i) hi_[n_struct_ + m_ + i] = 0.0;
        }
        return run(cost_, iter_limit);
    }

    double objective_value(const std::vector<double>& c) const {
        double v = 0;
        for (int j = 0; j < n_; ++j)
            if (state_[j] != kBasic) v += c[j] * val_[j];
        for (int i = 0; i < m_; ++i) v += c[basis_[i]] * beta_[i];
        return v;
    }

    std::vector<double> solution() const {
        std::vector<double> x(n_struct_);
        for (int j = 0; j < n_struct_; ++j) x[j] = (state_[j] == kBasic) ? 0.0 : val_[j];
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_struct_) x[basis_[i]] = beta_[i];
        return x;
    }

    double objective() const { return objective_value(cost_); }

private:
    enum State { kBasic, kAtLower, kAtUpper };

    // Rebuilds the reduced-cost row z_j = c_j - c_B . column_j from scratch.
    void rebuild_costs(const std::vector<double>& c) {
        z_.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) z_[j] = c[j];
        for (int i = 0; i < m_; ++i) {
            double cb = c[basis_[i]];
            if (cb == 0.0) continue;
            const std::vector<double>& row = t_[i];
            for (int j = 0; j < n_; ++j) z_[j] -= cb * row[j];
        }
    }

    LpStatus run(const std::vector<double>& c, long iter_limit) {
        long degenerate_streak = 0;
        rebuild_costs(c);
        for (long iter = 0; iter < iter_limit; ++iter) {
            if ((iter & 0xff) == 0xff) rebuild_costs(c);  // shed drift

            bool bland = degenerate_streak > 2L * (m_ + n_);
            int enter = -1, dir = 0;
            double best = -kCostEps;
            for (int j = 0; j < n_; ++j) {
                if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
                double d = z_[j];
                if (state_[j] == kAtLower && d < -kCostEps) {
                    if (bland) {
                        enter = j;
                        dir = +1;
                        break;
                    }
                    if (d < best) {
                        best = d;
                        enter = j;
                        dir = +1;
                    }
                } else if (state_[j] == kAtUpper && d > kCostEps) {
                    if (bland) {
                        enter = j;
                        dir = -1;
                        break;
                    }
                    if (-d < best) {
                        best = -d;
                        enter = j;
                        dir = -1;
                    }
                }
            }
            if (enter < 0) return LpStatus::kOptimal;

            // Ratio test against basic bounds and the entering span.
            double limit = hi_[enter] - lo_[enter];
            int leave_row = -1;
            int leave_to = 0;  // which bound the leaving variable hits
            for (int i = 0; i < m_; ++i) {
                double a = t_[i][enter] * dir;
                if (a > kEps) {
                    double room = (beta_[i] - lo_[basis_[i]]) / a;
                    if (room < limit - kEps ||
                        (room < limit + kEps && leave_row >= 0 &&
                         basis_[i] < basis_[leave_row])) {
                        limit = std::max(room, 0.0);
                        leave_row = i;
                        leave_to = -1;
                    }
                } else if (a < -kEps) {
                    double room = (hi_[basis_[i]] - beta_[i]) / (-a);
                    if (room < limit - kEps ||
                        (room < limit + kEps && leave_row >= 0 &&
                         basis_[i] < basis_[leave_row])) {
                        limit = std::max(room, 0.0);
                        leave_row = i;
                        leave_to = +1;
                    }
                }
            }
            if (!std::isfinite(limit)) return LpStatus::kUnbounded;
            degenerate_streak = (limit < kEps) ? degenerate_streak + 1 : 0;

            double delta = limit * dir;
            for (int i = 0; i < m_; ++i) beta_[i] -= t_[i][enter] * delta;
            if (leave_row < 0) {
                // Bound flip: the entering variable crosses its span.
                val_[enter] = (dir > 0) ? hi_[enter] : lo_[enter];
                state_[enter] = (dir > 0) ? kAtUpper : kAtLower;
                continue;
            }
            int leaving = basis_[leave_row];
            val_[leaving] = (leave_to < 0) ? lo_[leaving] : hi_[leaving];
            state_[leaving] = (leave_to < 0) ? kAtLower : kAtUpper;
            // An artificial never returns once it leaves.
            if (leaving >= n_struct_ + m_) {
                lo_[leaving] = hi_[leaving] = 0.0;
                val_[leaving] = 0.0;
            }
            double entering_value = val_[enter] + delta;
            pivot(leave_row, enter);
            // Cost row follows the same elimination.
            double ze = z_[enter];
            if (std::abs(ze) > 1e-14) {
                const std::vector<double>& row = t_[leave_row];
                for (int j = 0; j < n_; ++j) z_[j] -= ze * row[j];
            }
            z_[enter] = 0.0;
            basis_[leave_row] = enter;
            state_[enter] = kBasic;
            beta_[leave_row] = entering_value;
        }
        return LpStatus::kIterLimit;
    }

    void pivot(int r, int j) {
        // Columns pinned to a point and out of the basis can never re-enter;
        // their tableau entries are dead weight, so leave them stale.
        double piv = t_[r][j];
        auto live = [&](int c) {
            return c == n_ || !(lo_[c] == hi_[c] && state_[c] != kBasic);
        };
        for (int c = 0; c <= n_; ++c)
            if (live(c)) t_[r][c] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r || std::abs(t_[i][j]) < 1e-12) continue;
            double f = t_[i][j];
            for (int c = 0; c <= n_; ++c)
                if (live(c)) t_[i][c] -= f * t_[r][c];
        }
    }

    int m_, n_struct_, n_;
    bool need_phase1_ = false;
    std::vector<std::vector<double>> t_;
    std::vector<double> z_;
    std::vector<double> lo_, hi_, cost_, val_, beta_;
    std::vector<int> basis_;
    std::vector<State> state_;
};

}  // namespace

LpResult solve_lp(const Problem& p, const std::vector<int>& active_rows,
                  const std::vector<double>& lo, const std::vector<double>& hi) {
    Tableau t(p, active_rows, lo, hi);
    long iter_limit = 200L * (p.num_vars() + static_cast<long>(active_rows.size()) + 10);
    LpStatus s = t.optimize(iter_limit);
    LpResult res;
    res.status = s;
    if (s == LpStatus::kOptimal) {
        res.x = t.solution();
        res.obj = t.objective();
    }
    return res;
}

LpResult solve_lp(const Problem& p) {
    std::vector<int> all(p.rows.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return solve_lp(p, all, p.lower, p.upper);
}

bool feasible(const Problem& p, const std::vector<double>& x, double tol) {
    if (static_cast<int>(x.size()) != p.num_vars()) return false;
    for (int j = 0; j < p.num_vars(); ++j) {
        if (x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol) return false;
        if (p.integral[j] && std::abs(x[j] - std::round(x[j])) > tol) return false;
    }
    for (const Row& r : p.rows) {
        double lhs = 0;
        for (const Term& t : r.terms) lhs += t.coeff * x[t.var];
        if (r.rel == Rel::kLe && lhs > r.rhs + tol) return false;
        if (r.rel == Rel::kGe && lhs < r.rhs - tol) return false;
        if (r.rel == Rel::kEq && std::abs(lhs - r.rhs) > tol) return false;
    }
    return true;
}

MilpResult solve_milp(const Problem& p_in, const MilpOptions& opt) {
    Problem owned = p_in;  // generated cuts are appended here
    const Problem& p = owned;
    auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        return ms > opt.budget_ms;
    };

    std::vector<char> lazy(p.rows.size(), 0);
    for (int r : opt.lazy_rows) lazy[r] = 1;
    std::vector<int> active;
    for (size_t r = 0; r < p.rows.size(); ++r)
        if (!lazy[r]) active.push_back(static_cast<int>(r));

    MilpResult best;
    best.status = MilpStatus::kInfeasible;
    best.obj = opt.cutoff;
    for (const auto& w : opt.warm_starts) {
        if (!feasible(p, w)) continue;
        double obj = 0;
        for (int j = 0; j < p.num_vars(); ++j) obj += p.objective[j] * w[j];
        if (obj < best.obj) {
            best.obj = obj;
            best.x = w;
            best.status = MilpStatus::kFeasible;
        }
    }

    std::vector<int> prio = opt.branch_priority;
    prio.resize(p.num_vars(), 0);

    struct Node {
        std::vector<double> lo, hi;
        double bound;
        long seq;
    };
    // Best-bound-first: the incumbent usually arrives via warm starts, so
    // raising the proven bound is the scarce work. Ties break newest-first.
    auto node_after = [](const Node& a, const Node& b) {
        return a.bound != b.bound ? a.bound > b.bound : a.seq < b.seq;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(node_after)> open(node_after);
    long seq = 0;
    open.push({p.lower, p.upper, -kInf, seq++});
    bool exhausted = true;
    double open_bound = kInf;  // tightest bound among pruned-by-budget nodes

    while (!open.empty()) {
        if (out_of_time()) {
            exhausted = false;
            open_bound = std::min(open_bound, open.top().bound);
            break;
        }
        Node node = open.top();
        open.pop();
        if (node.bound >= best.obj - 1e-9) continue;

        // Cutting loop: re-solve until no lazy row or generated cut is
        // violated at the fractional optimum.
        LpResult rel;
        for (;;) {
            rel = solve_lp(p, active, node.lo, node.hi);
            if (rel.status != LpStatus::kOptimal) break;
            int added = 0;
            for (size_t r = 0; r < p.rows.size(); ++r) {
                if (!lazy[r]) continue;
                const Row& row = p.rows[r];
                double lhs = 0;
                for (const Term& t : row.terms) lhs += t.coeff * rel.x[t.var];
                bool viol = (row.rel == Rel::kLe && lhs > row.rhs + kEps) ||
                            (row.rel == Rel::kGe && lhs < row.rhs - kEps) ||
                            (row.rel == Rel::kEq && std::abs(lhs - row.rhs) > kEps);
                if (viol) {
                    active.push_back(static_cast<int>(r));
                    lazy[r] = 0;
                    ++added;
                }
            }
            if (!added && opt.separate && out_of_time() == false) {
                for (Row& cut : opt.separate(rel.x)) {
                    active.push_back(static_cast<int>(owned.rows.size()));
                    owned.add_row(std::move(cut));
                    lazy.push_back(0);
                    ++added;
                }
            }
            if (!added) break;
        }
        ++best.nodes;
        if (rel.status == LpStatus::kIterLimit) {
            exhausted = false;
            continue;
        }
        if (rel.status != LpStatus::kOptimal) continue;
        if (rel.obj >= best.obj - 1e-9) continue;

        // Branch on the most fractional variable in the best priority class.
        int pick = -1;
        double pick_frac = 0;
        for (int j = 0; j < p.num_vars(); ++j) {
            if (!p.integral[j]) continue;
            double frac = std::abs(rel.x[j] - std::round(rel.x[j]));
            if (frac < 1e-6) continue;
            if (pick < 0 || prio[j] < prio[pick] ||
                (prio[j] == prio[pick] && frac > pick_frac)) {
                pick = j;
                pick_frac = frac;
            }
        }
        if (pick < 0) {
            // Integral: snap and accept.
            std::vector<double> x = rel.x;
            for (int j = 0; j < p.num_vars(); ++j)
                if (p.integral[j]) x[j] = std::round(x[j]);
            if (feasible(p, x) && rel.obj < best.obj) {
                best.obj = rel.obj;
                best.x = std::move(x);
                best.status = MilpStatus::kFeasible;
            }
            continue;
        }
        double floor_v = std::floor(rel.x[pick] + 1e-9);
        Node down = node, up = node;
        down.hi[pick] = floor_v;
        down.bound = rel.obj;
        up.lo[pick] = floor_v + 1;
        up.bound = rel.obj;
        // The rounding nearer the relaxation gets the newer sequence, so it
        // wins ties.
        if (rel.x[pick] - floor_v > 0.5) {
            down.seq = seq++;
            up.seq = seq++;
        } else {
            up.seq = seq++;
            down.seq = seq++;
        }
        open.push(std::move(down));
        open.push(std::move(up));
    }

    if (best.status == MilpStatus::kFeasible && exhausted) {
        best.status = MilpStatus::kOptimal;
        best.bound = best.obj;
    } else if (best.status == MilpStatus::kFeasible) {
        best.status = MilpStatus::kFeasible;
        best.bound = std::min(open_bound, best.obj);
    } else if (exhausted) {
        best.status = MilpStatus::kInfeasible;
    } else {
        best.status = MilpStatus::kBudget;
        best.bound = open_bound;
    }
    return best;
}

}  // namespace ncp::lp
