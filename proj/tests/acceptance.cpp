// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "support.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

using namespace nucbound;
using nbtest::random_tensor;
using nbtest::rel_err;

namespace {

/// Collects the first few violations of a criterion.
class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (failures_ < 5) {
                detail_ += (detail_.empty() ? "" : "; ") + what;
            }
            ++failures_;
        }
    }
    [[nodiscard]] bool        ok() const { return failures_ == 0; }
    [[nodiscard]] std::string summary() const { return detail_ + (failures_ > 5 ? " (+" + std::to_string(failures_ - 5) + " more)" : ""); }

private:
    std::size_t failures_ = 0;
    std::string detail_;
};

std::string num(double x) { return format_number(x); }

bool leq(double a, double b, double rel = 1e-9) { return a <= b + rel * std::max(std::abs(a), std::abs(b)); }

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

void sharp_reproduction(Check& c) {
    for (std::size_t j : {2u, 4u, 8u}) {
        const auto   a     = nbtest::sharp_instance(j);
        const double root  = std::sqrt(static_cast<double>(j));
        const auto   r     = full_report(a);
        const auto   tag   = "J=" + std::to_string(j) + ": ";
        const double flat1 = r.per_mode[0].flattening_nuclear;
        c.require(rel_err(flat1, 1.0) <= 1e-8, tag + "||A_(1)||_* = " + num(flat1));
        c.require(rel_err(r.lower, root) <= 1e-8, tag + "lower = " + num(r.lower));
        c.require(rel_err(r.upper, root) <= 1e-8, tag + "upper = " + num(r.upper));
        c.require(r.certificate.has_value(), tag + "no certificate");
        if (r.certificate) {
            c.require(rel_err(r.certificate->value, root) <= 1e-8, tag + "certificate value " + num(r.certificate->value));
        }
        const double dual = dual_lower_estimate(a);
        c.require(rel_err(dual, root) <= 1e-8, tag + "dual_lower = " + num(dual));
    }
}

void chain(Check& c, const DenseTensor& a, const std::string& tag) {
    const auto r = full_report(a);
    c.require(leq(r.hash_norm, r.lower), tag + "hash_norm " + num(r.hash_norm) + " > lower " + num(r.lower));
    c.require(leq(r.lower, r.upper), tag + "lower " + num(r.lower) + " > upper " + num(r.upper));
    for (const auto& m : r.per_mode) {
        c.require(m.flattening_nuclear <= r.upper + 1e-9 * r.upper, tag + "mode " + std::to_string(m.mode) + " flattening nuclear above upper");
        c.require(leq(r.upper, m.coarse_upper), tag + "upper above coarse bound of mode " + std::to_string(m.mode));
        c.require(leq(m.refined_upper, m.coarse_upper), tag + "refined above coarse in mode " + std::to_string(m.mode));
    }
}

void lower_bound_chain(Check& c) {
    std::mt19937_64 rng(20240601);
    for (int t = 0; t < 200; ++t) {
        const Shape s{1 + rng() % 5, 1 + rng() % 6, 1 + rng() % 7};
        chain(c, random_tensor(s, rng), "tensor " + std::to_string(t) + ": ");
    }
}

void diagonal_equality(Check& c) {
    std::mt19937_64 rng(20240602);
    for (int t = 0; t < 50; ++t) {
        const std::size_t i = 2 + rng() % 4, j = 2 + rng() % 4, k = 2 + rng() % 4;
        const std::size_t r   = 1 + rng() % std::min(i, j);
        const auto        d   = nbtest::diagonal_dec(i, j, k, r, rng);
        const auto        rep = full_report(d.tensor);
        const auto        tag = "instance " + std::to_string(t) + ": ";
        c.require(rel_err(rep.lower, d.sigma_sum) <= 1e-8, tag + "lower " + num(rep.lower) + " vs " + num(d.sigma_sum));
        c.require(rel_err(rep.upper, d.sigma_sum) <= 1e-8, tag + "upper " + num(rep.upper) + " vs " + num(d.sigma_sum));
        c.require(rep.certificate.has_value(), tag + "no certificate");
        if (rep.certificate) {
            c.require(rep.certificate->max_z_deviation <= 1e-8, tag + "max_z_deviation " + num(rep.certificate->max_z_deviation));
            c.require(rel_err(rep.certificate->value, d.sigma_sum) <= 1e-8, tag + "certificate value " + num(rep.certificate->value));
        }
    }
}

void oracle_sandwich(Check& c) {
    std::mt19937_64 rng(20240603);
    for (int t = 0; t < 50; ++t) {
        const Shape   s = t % 2 == 0 ? Shape{2, 2, 2} : Shape{2, 2, 3};
        const auto    a = nbtest::unit_hs(random_tensor(s, rng));
        PrimalOptions o;
        o.restarts = 50;
        o.seed     = 7;
        o.threads  = threads();
        const auto   e   = primal_estimate(a, o);
        const double lo  = lower_bound(a);
        const double up  = upper_bound(a);
        const auto   tag = "tensor " + std::to_string(t) + ": ";
        c.require(e.converged, tag + "residual tolerance unmet (" + num(e.residual) + ")");
        c.require(e.dual_lower <= e.primal_upper, tag + "dual " + num(e.dual_lower) + " > primal " + num(e.primal_upper));
        c.require(e.primal_upper <= up + 1e-3, tag + "primal " + num(e.primal_upper) + " > upper " + num(up));
        c.require(e.primal_upper >= lo - 1e-3, tag + "primal " + num(e.primal_upper) + " < lower " + num(lo));
    }
}

void general_order(Check& c) {
    std::mt19937_64 rng(20240604);
    for (const auto& [shape, count] : {std::pair{Shape{2, 3, 3, 4}, 50}, std::pair{Shape{2, 2, 2, 3, 3}, 20}}) {
        Shape sorted = shape;
        std::sort(sorted.begin(), sorted.end());
        const double factor = std::sqrt(static_cast<double>(detail::product(sorted) / sorted.back()));
        for (int t = 0; t < count; ++t) {
            const auto a   = random_tensor(shape, rng);
            const auto tag = "order " + std::to_string(shape.size()) + " #" + std::to_string(t) + ": ";
            chain(c, a, tag);
            c.require(rel_err(hs_upper_bound(a), factor * hs_norm(a)) <= 1e-10, tag + "hs_upper mismatch");
        }
    }
}

void isomorphism(Check& c) {
    std::mt19937_64 rng(20240605);
    for (int t = 0; t < 100; ++t) {
        Shape s(2 + rng() % 3);
        for (auto& d : s) {
            d = 1 + rng() % 4;
        }
        const auto a = random_tensor(s, rng);
        const auto b = random_tensor(s, rng);
        const auto tag = "instance " + std::to_string(t) + " mode ";
        for (std::size_t m = 1; m <= s.size(); ++m) {
            const auto fa = flatten(a, m);
            const auto fb = flatten(b, m);
            c.require(unflatten(fa, s, m) == a, tag + std::to_string(m) + ": roundtrip not exact");
            c.require(rel_err(detail::dot(fa.data(), fb.data()), inner_product(a, b)) <= 1e-12, tag + std::to_string(m) + ": inner product");
            c.require(rel_err(frobenius_norm(fa), hs_norm(a)) <= 1e-12, tag + std::to_string(m) + ": norm");
        }
    }
}

void equivariance(Check& c) {
    std::mt19937_64                         rng(20240606);
    std::uniform_real_distribution<double>  scale(-10.0, 10.0);
    for (int t = 0; t < 100; ++t) {
        Shape s(3 + rng() % 2);
        for (auto& d : s) {
            d = 1 + rng() % 4;
        }
        const auto   a    = random_tensor(s, rng);
        const auto   base = full_report(a);
        const double k    = scale(rng);
        const auto   tag  = "instance " + std::to_string(t) + ": ";

        const auto sr = full_report(a.scaled(k));
        const auto same = [&](double got, double want, const char* what) { c.require(rel_err(got, std::abs(k) * want) <= 1e-9, tag + "scale breaks " + what); };
        same(sr.lower, base.lower, "lower");
        same(sr.upper, base.upper, "upper");
        same(sr.hash_norm, base.hash_norm, "hash_norm");
        same(sr.hs_upper, base.hs_upper, "hs_upper");
        for (std::size_t m = 0; m < s.size(); ++m) {
            same(sr.per_mode[m].flattening_nuclear, base.per_mode[m].flattening_nuclear, "flattening_nuclear");
            same(sr.per_mode[m].refined_upper, base.per_mode[m].refined_upper, "refined_upper");
            same(sr.per_mode[m].coarse_upper, base.per_mode[m].coarse_upper, "coarse_upper");
        }

        std::vector<std::size_t> perm(s.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto pr = full_report(permute_modes(a, perm));
        c.require(rel_err(pr.lower, base.lower) <= 1e-9, tag + "permutation breaks lower");
        c.require(rel_err(pr.upper, base.upper) <= 1e-9, tag + "permutation breaks upper");
        c.require(rel_err(pr.hash_norm, base.hash_norm) <= 1e-9, tag + "permutation breaks hash_norm");
    }
}

std::string capture(const std::string& command, int& status) {
    std::string out;
    FILE*       pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t            n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), n);
    }
    status = ::pclose(pipe);
    return out;
}

void determinism(Check& c) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "nucbound_acceptance";
    fs::create_directories(dir);
    std::mt19937_64 rng(20240607);
    const auto      file = (dir / "input.txt").string();
    std::ofstream(file) << format_tensor_text(random_tensor({2, 3, 2}, rng));

    const std::string exe = NUCBOUND_CLI_PATH;
    for (const std::string& args : std::vector<std::string>{"bounds '" + file + "'", "bounds '" + file + "' --pretty", "oracle '" + file + "' --restarts 20 --seed 42", "oracle '" + file + "' --restarts 20 --seed 42 --pretty"}) {
        int        s1 = 0, s2 = 0;
        const auto first  = capture("'" + exe + "' " + args, s1);
        const auto second = capture("'" + exe + "' " + args, s2);
        c.require(s1 == 0 && s2 == 0, args + ": nonzero exit");
        c.require(!first.empty(), args + ": no output");
        c.require(first == second, args + ": outputs differ");
    }
    int        s1 = 0, s2 = 0;
    const auto serial   = capture("NUCBOUND_THREADS=1 '" + exe + "' oracle '" + file + "' --restarts 20 --seed 42", s1);
    const auto parallel = capture("NUCBOUND_THREADS=8 '" + exe + "' oracle '" + file + "' --restarts 20 --seed 42", s2);
    c.require(s1 == 0 && s2 == 0 && serial == parallel, "oracle output depends on thread count");
    fs::remove_all(dir);
}

} // namespace

int main() {
    struct Criterion {
        const char*                 name;
        std::function<void(Check&)> body;
        double                      budget_s; /// 0: no time limit
    };
    const std::vector<Criterion> criteria = {
        {"sharp-instance reproduction", sharp_reproduction, 1.0},
        {"lower-bound chain", lower_bound_chain, 30.0},
        {"diagonal-decomposition equality", diagonal_equality, 0.0},
        {"oracle sandwich", oracle_sandwich, 120.0},
        {"general-N bounds", general_order, 0.0},
        {"isomorphism and norms", isomorphism, 0.0},
        {"equivariance", equivariance, 0.0},
        {"determinism", determinism, 0.0},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check      check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criteria[i].budget_s > 0.0) {
            check.require(elapsed < criteria[i].budget_s, "took " + num(elapsed) + " s, limit " + num(criteria[i].budget_s) + " s");
        }
        std::ostringstream line;
        line << (check.ok() ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].name << " (" << std::fixed << std::setprecision(2) << elapsed << " s)";
        if (!check.ok()) {
            line << ": " << check.summary();
            ++failed;
        }
        std::cout << line.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
