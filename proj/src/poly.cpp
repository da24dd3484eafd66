#include "setrecon/poly.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

namespace setrecon {

Polynomial::Polynomial(std::vector<FieldElement> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

void Polynomial::normalize() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial Polynomial::linear(FieldElement root, const PrimeField& field) {
    return Polynomial(std::vector<FieldElement>{field.neg(root), 1});
}

Polynomial Polynomial::from_roots(std::span<const FieldElement> roots, const PrimeField& field) {
    std::vector<FieldElement> c{1};
    c.reserve(roots.size() + 1);
    for (FieldElement r : roots) {
        const FieldElement neg_r = field.neg(r);
        c.push_back(0);
        for (std::size_t i = c.size() - 1; i > 0; --i) {
            c[i] = field.add(c[i - 1], field.mul(c[i], neg_r));
        }
        c[0] = field.mul(c[0], neg_r);
    }
    return Polynomial(std::move(c));
}

FieldElement eval(const Polynomial& p, FieldElement x, const PrimeField& field) {
    FieldElement acc = 0;
    const auto& c = p.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = field.add(field.mul(acc, x), *it);
    return acc;
}

Polynomial add(const Polynomial& a, const Polynomial& b, const PrimeField& field) {
    std::vector<FieldElement> out(std::max(a.coeffs().size(), b.coeffs().size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = field.add(a.coeff(i), b.coeff(i));
    return Polynomial(std::move(out));
}

Polynomial sub(const Polynomial& a, const Polynomial& b, const PrimeField& field) {
    std::vector<FieldElement> out(std::max(a.coeffs().size(), b.coeffs().size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = field.sub(a.coeff(i), b.coeff(i));
    return Polynomial(std::move(out));
}

Polynomial mul(const Polynomial& a, const Polynomial& b, const PrimeField& field) {
    if (a.is_zero() || b.is_zero()) return {};
    const auto& ac = a.coeffs();
    const auto& bc = b.coeffs();
    std::vector<FieldElement> out(ac.size() + bc.size() - 1, 0);
    for (std::size_t i = 0; i < ac.size(); ++i) {
        if (ac[i] == 0) continue;
        for (std::size_t j = 0; j < bc.size(); ++j) {
            out[i + j] = field.add(out[i + j], field.mul(ac[i], bc[j]));
        }
    }
    return Polynomial(std::move(out));
}

Polynomial scale(const Polynomial& p, FieldElement s, const PrimeField& field) {
    std::vector<FieldElement> out = p.coeffs();
    for (auto& v : out) v = field.mul(v, s);
    return Polynomial(std::move(out));
}

DivMod divmod(const Polynomial& dividend, const Polynomial& divisor, const PrimeField& field) {
    if (divisor.is_zero()) throw Error(Errc::DivisionByZeroPolynomial, "divisor is the zero polynomial");
    if (dividend.degree() < divisor.degree()) return {Polynomial{}, dividend};

    std::vector<FieldElement> rem = dividend.coeffs();
    const auto& dv = divisor.coeffs();
    const std::size_t dn = dv.size() - 1;
    const FieldElement lead_inv = divisor.is_monic() ? 1 : field.inv(divisor.leading());
    std::vector<FieldElement> quot(rem.size() - dn, 0);

    for (std::size_t k = quot.size(); k-- > 0;) {
        const FieldElement factor = field.mul(rem[k + dn], lead_inv);
        quot[k] = factor;
        if (factor == 0) continue;
        for (std::size_t j = 0; j <= dn; ++j) {
            rem[k + j] = field.sub(rem[k + j], field.mul(factor, dv[j]));
        }
    }
    rem.resize(dn);
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

Polynomial make_monic(const Polynomial& p, const PrimeField& field) {
    if (p.is_zero() || p.is_monic()) return p;
    return scale(p, field.inv(p.leading()), field);
}

Polynomial gcd(const Polynomial& a, const Polynomial& b, const PrimeField& field) {
    if (a.is_zero() && b.is_zero()) throw Error(Errc::BothZero, "gcd of two zero polynomials");
    Polynomial x = a;
    Polynomial y = b;
    while (!y.is_zero()) {
        Polynomial r = divmod(x, y, field).remainder;
        x = std::move(y);
        y = std::move(r);
    }
    return make_monic(x, field);
}

Polynomial pow_mod(const Polynomial& base, u64 e, const Polynomial& modulus, const PrimeField& field) {
    Polynomial result = divmod(Polynomial::one(), modulus, field).remainder;
    Polynomial b = divmod(base, modulus, field).remainder;
    while (e != 0) {
        if (e & 1) result = divmod(mul(result, b, field), modulus, field).remainder;
        e >>= 1;
        if (e != 0) b = divmod(mul(b, b, field), modulus, field).remainder;
    }
    return result;
}

Polynomial interpolate(std::span<const Point> points, const PrimeField& field) {
    const std::size_t k = points.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (points[i].x == points[j].x) {
                throw Error(Errc::DuplicatePoint, "duplicate abscissa " + std::to_string(points[i].x));
            }
        }
    }
    std::vector<FieldElement> xs(k);
    for (std::size_t i = 0; i < k; ++i) xs[i] = points[i].x;
    // Master polynomial prod (x - x_i); each basis numerator is master / (x - x_i).
    const Polynomial master = Polynomial::from_roots(xs, field);

    std::vector<FieldElement> acc(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        if (points[i].y == 0) continue;
        Polynomial basis = divmod(master, Polynomial::linear(xs[i], field), field).quotient;
        const FieldElement weight = field.mul(points[i].y, field.inv(eval(basis, xs[i], field)));
        const auto& bc = basis.coeffs();
        for (std::size_t j = 0; j < bc.size(); ++j) acc[j] = field.add(acc[j], field.mul(weight, bc[j]));
    }
    return Polynomial(std::move(acc));
}

namespace {

/// Solves A·u = rhs in place (augmented matrix, last column is rhs).
/// Free variables are set to zero. Returns false on an inconsistent system.
bool solve_linear(std::vector<std::vector<FieldElement>>& rows, std::size_t unknowns, std::vector<FieldElement>& out,
                  const PrimeField& field) {
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t col = 0; col < unknowns && r < rows.size(); ++col) {
        std::size_t sel = r;
        while (sel < rows.size() && rows[sel][col] == 0) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[r], rows[sel]);
        const FieldElement inv = field.inv(rows[r][col]);
        for (std::size_t j = col; j <= unknowns; ++j) rows[r][j] = field.mul(rows[r][j], inv);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][col] == 0) continue;
            const FieldElement f = rows[i][col];
            for (std::size_t j = col; j <= unknowns; ++j) {
                rows[i][j] = field.sub(rows[i][j], field.mul(f, rows[r][j]));
            }
        }
        pivot_col.push_back(col);
        ++r;
    }
    for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][unknowns] != 0) return false;
    }
    out.assign(unknowns, 0);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) out[pivot_col[i]] = rows[i][unknowns];
    return true;
}

}  // namespace

RationalFunction rational_interpolate(std::span<const Point> samples, long long delta, std::size_t bound,
                                      const PrimeField& field) {
    const long long d = static_cast<long long>(bound);
    if (samples.size() < bound + 1) {
        throw Error(Errc::InvalidArgument, "rational interpolation needs at least bound+1 samples");
    }
    if (delta > d || delta < -d) {
        throw Error(Errc::NoSolution, "degree difference " + std::to_string(delta) + " exceeds bound " +
                                          std::to_string(bound));
    }
    for (const auto& s : samples) {
        if (s.y == 0) throw Error(Errc::InvalidArgument, "ratio samples must be nonzero");
    }
    // floor((d + delta) / 2) with d + delta >= 0.
    const auto num_deg = static_cast<std::size_t>((d + delta) / 2);
    const auto den_deg = static_cast<std::size_t>(static_cast<long long>(num_deg) - delta);
    const std::size_t unknowns = num_deg + den_deg;

    // Row i: sum_k p_k x^k - r sum_k q_k x^k = r x^den_deg - x^num_deg.
    std::vector<std::vector<FieldElement>> rows(bound + 1, std::vector<FieldElement>(unknowns + 1, 0));
    for (std::size_t i = 0; i <= bound; ++i) {
        const auto [x, r] = samples[i];
        auto& row = rows[i];
        FieldElement xp = 1;
        const std::size_t top = std::max(num_deg, den_deg);
        for (std::size_t k = 0; k <= top; ++k) {
            if (k < num_deg) row[k] = xp;
            if (k < den_deg) row[num_deg + k] = field.neg(field.mul(r, xp));
            if (k == num_deg) row[unknowns] = field.sub(row[unknowns], xp);
            if (k == den_deg) row[unknowns] = field.add(row[unknowns], field.mul(r, xp));
            xp = field.mul(xp, x);
        }
    }

    std::vector<FieldElement> solution;
    if (!solve_linear(rows, unknowns, solution, field)) {
        throw Error(Errc::NoSolution, "interpolation system is inconsistent");
    }
    std::vector<FieldElement> pc(solution.begin(), solution.begin() + static_cast<std::ptrdiff_t>(num_deg));
    pc.push_back(1);
    std::vector<FieldElement> qc(solution.begin() + static_cast<std::ptrdiff_t>(num_deg), solution.end());
    qc.push_back(1);
    Polynomial num(std::move(pc));
    Polynomial den(std::move(qc));

    const Polynomial g = gcd(num, den, field);
    if (g.degree() > 0) {
        num = divmod(num, g, field).quotient;
        den = divmod(den, g, field).quotient;
    }

    for (const auto& [x, r] : samples) {
        if (eval(num, x, field) != field.mul(r, eval(den, x, field))) {
            throw Error(Errc::VerificationFailed, "recovered fraction disagrees with sample at x=" + std::to_string(x));
        }
    }
    return {std::move(num), std::move(den)};
}

namespace {

FieldElement random_element(std::mt19937_64& rng, u64 q) {
    constexpr u64 kMax = std::numeric_limits<u64>::max();
    const u64 limit = kMax - (kMax % q);
    u64 x = 0;
    do {
        x = rng();
    } while (x >= limit);
    return x % q;
}

// Square root of a quadratic residue mod an odd prime.
std::optional<FieldElement> sqrt_mod(FieldElement a, const PrimeField& field) {
    const u64 q = field.modulus();
    if (a == 0) return 0;
    if (field.pow(a, (q - 1) / 2) != 1) return std::nullopt;
    if (q % 4 == 3) return field.pow(a, (q + 1) / 4);

    u64 s = 0;
    u64 odd = q - 1;
    while ((odd & 1) == 0) {
        odd >>= 1;
        ++s;
    }
    FieldElement z = 2;
    while (field.pow(z, (q - 1) / 2) != q - 1) ++z;

    FieldElement c = field.pow(z, odd);
    FieldElement t = field.pow(a, odd);
    FieldElement r = field.pow(a, (odd + 1) / 2);
    u64 m = s;
    while (t != 1) {
        u64 i = 0;
        FieldElement t2 = t;
        while (t2 != 1) {
            t2 = field.mul(t2, t2);
            ++i;
        }
        FieldElement b = c;
        for (u64 j = 0; j + i + 1 < m; ++j) b = field.mul(b, b);
        m = i;
        c = field.mul(b, b);
        t = field.mul(t, c);
        r = field.mul(r, b);
    }
    return r;
}

void split_into(const Polynomial& f, const PrimeField& field, std::mt19937_64& rng, std::vector<FieldElement>& out) {
    const auto deg = f.degree();
    if (deg <= 0) return;
    if (deg == 1) {
        out.push_back(field.neg(f.coeff(0)));
        return;
    }
    if (deg == 2) {
        const FieldElement b = f.coeff(1);
        const FieldElement c = f.coeff(0);
        const FieldElement disc = field.sub(field.mul(b, b), field.mul(4 % field.modulus(), c));
        const auto s = sqrt_mod(disc, field);
        if (!s || *s == 0) throw Error(Errc::DoesNotSplit, "quadratic factor has no distinct roots");
        const FieldElement half = field.inv(2);
        out.push_back(field.mul(field.sub(*s, b), half));
        out.push_back(field.mul(field.sub(field.neg(b), *s), half));
        return;
    }
    const u64 q = field.modulus();
    for (int attempt = 0; attempt < kSplitRetryLimit; ++attempt) {
        const Polynomial shifted(std::vector<FieldElement>{random_element(rng, q), 1});
        Polynomial h = pow_mod(shifted, (q - 1) / 2, f, field);
        h = sub(h, Polynomial::one(), field);
        if (h.is_zero()) continue;
        const Polynomial g = gcd(f, h, field);
        if (g.degree() <= 0 || g.degree() == deg) continue;
        split_into(g, field, rng, out);
        split_into(divmod(f, g, field).quotient, field, rng, out);
        return;
    }
    throw Error(Errc::RetryLimitExceeded, "random splitting failed " + std::to_string(kSplitRetryLimit) + " times");
}

}  // namespace

std::vector<FieldElement> roots(const Polynomial& p, const PrimeField& field, std::mt19937_64& rng) {
    if (p.is_zero()) throw Error(Errc::InvalidArgument, "roots of the zero polynomial");
    const Polynomial f = make_monic(p, field);
    const auto deg = f.degree();
    const u64 q = field.modulus();
    std::vector<FieldElement> out;
    out.reserve(static_cast<std::size_t>(deg));

    if (deg == 0) return out;
    if (static_cast<u64>(deg) > q) throw Error(Errc::DoesNotSplit, "degree exceeds field size");

    if (q <= kExhaustiveRootScanLimit) {
        for (FieldElement x = 0; x < q; ++x) {
            if (eval(f, x, field) == 0) out.push_back(x);
        }
    } else {
        // gcd(f, x^q - x) keeps exactly the distinct rational roots.
        const Polynomial x_poly(std::vector<FieldElement>{0, 1});
        const Polynomial xq = pow_mod(x_poly, q, f, field);
        const Polynomial rational_part = gcd(f, sub(xq, x_poly, field), field);
        if (rational_part.degree() != deg) {
            throw Error(Errc::DoesNotSplit, "polynomial of degree " + std::to_string(deg) + " has only " +
                                                std::to_string(rational_part.degree()) + " distinct roots in F_q");
        }
        split_into(f, field, rng, out);
    }

    std::sort(out.begin(), out.end());
    if (static_cast<std::ptrdiff_t>(out.size()) != deg || std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw Error(Errc::DoesNotSplit, "found " + std::to_string(out.size()) + " roots for degree " +
                                            std::to_string(deg));
    }
    if (Polynomial::from_roots(out, field) != f) {
        throw Error(Errc::DoesNotSplit, "root reconstruction mismatch");
    }
    return out;
}

}  // namespace setrecon
