#include "setrecon/sketch.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "setrecon/poly.hpp"

namespace setrecon {

namespace {

// Root finding draws from a fixed-seed generator so decoding is reproducible;
// the seed affects running time only, never the recovered set.
constexpr u64 kRootFindingSeed = 0x5eedc0de2024ULL;

void require_same_params(const Sketch& a, const Sketch& b) {
    if (!(a.params() == b.params())) throw Error(Errc::ParamsMismatch, "sketches use different parameters");
}

std::vector<Point> ratio_samples(const Sketch& num, const Sketch& den) {
    const auto& params = num.params();
    const auto& field = params.prime_field();
    std::vector<Point> samples(params.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        samples[j] = {params.point(j), field.div(num.evals()[j], den.evals()[j])};
    }
    return samples;
}

std::vector<FieldElement> roots_within(const Polynomial& p, const PrimeField& field, u64 limit, std::mt19937_64& rng) {
    std::vector<FieldElement> found = roots(p, field, rng);
    if (!found.empty() && found.back() >= limit) {
        throw Error(Errc::DifferenceBoundExceeded, "decoded element " + std::to_string(found.back()) +
                                                       " lies outside the element universe");
    }
    return found;
}

[[noreturn]] void rethrow_as_bound_exceeded(const Error& e) {
    throw Error(Errc::DifferenceBoundExceeded, std::string("decoding failed (") + e.what() + ")");
}

std::vector<FieldElement> missing_within(const Sketch& superset, const Sketch& subset, u64 limit) {
    require_same_params(superset, subset);
    const auto& params = superset.params();
    const auto& field = params.prime_field();
    if (subset.cardinality() > superset.cardinality()) {
        throw Error(Errc::DifferenceBoundExceeded, "subset sketch is larger than superset sketch");
    }
    const u64 missing = superset.cardinality() - subset.cardinality();
    if (missing > params.d()) {
        throw Error(Errc::DifferenceBoundExceeded,
                    std::to_string(missing) + " missing elements exceed bound d=" + std::to_string(params.d()));
    }
    const std::vector<Point> samples = ratio_samples(superset, subset);
    const std::span<const Point> interp(samples.data(), params.d() + std::size_t{1});
    const Polynomial p = interpolate(interp, field);
    if (p.degree() != static_cast<std::ptrdiff_t>(missing) || !p.is_monic()) {
        throw Error(Errc::DifferenceBoundExceeded, "interpolated polynomial is not monic of degree " +
                                                       std::to_string(missing));
    }
    for (std::size_t j = interp.size(); j < samples.size(); ++j) {
        if (eval(p, samples[j].x, field) != samples[j].y) {
            throw Error(Errc::DifferenceBoundExceeded,
                        "verification point x=" + std::to_string(samples[j].x) + " disagrees with interpolation");
        }
    }
    std::mt19937_64 rng(kRootFindingSeed);
    try {
        return roots_within(p, field, limit, rng);
    } catch (const Error& e) {
        if (e.code() == Errc::DifferenceBoundExceeded) throw;
        rethrow_as_bound_exceeded(e);
    }
}

}  // namespace

SketchParams::SketchParams(const FieldParams& field) : field_(field), prime_(2) {
    validate(field);
    prime_ = PrimeField(field.q);
}

std::vector<FieldElement> SketchParams::points() const {
    std::vector<FieldElement> out(size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = point(j);
    return out;
}

Sketch::Sketch(SketchParams params, std::vector<FieldElement> evals, u64 cardinality)
    : params_(std::move(params)), evals_(std::move(evals)), cardinality_(cardinality) {
    if (evals_.size() != params_.size()) {
        throw Error(Errc::InvalidArgument, "sketch has " + std::to_string(evals_.size()) + " coordinates, expected " +
                                               std::to_string(params_.size()));
    }
    for (FieldElement v : evals_) {
        if (v == 0 || v >= params_.q()) {
            throw Error(Errc::InvalidArgument, "sketch coordinate " + std::to_string(v) + " is zero or non-canonical");
        }
    }
}

Sketch Sketch::empty(const SketchParams& params) { return Sketch(params, std::vector<FieldElement>(params.size(), 1), 0); }

FieldElement encode_owner(u64 value, std::uint32_t owner, const FieldParams& params) {
    if (value >= params.m) throw Error(Errc::KeyOutOfRange, "key " + std::to_string(value) + " >= m");
    const std::uint32_t max_owner = params.owner_encoding() ? params.owner_count : 0;
    if (owner > max_owner) {
        throw Error(Errc::OwnerOutOfRange, "owner " + std::to_string(owner) + " > " + std::to_string(max_owner));
    }
    return value + params.m * owner;
}

OwnerElement decode_owner(FieldElement encoded, u64 m) {
    return {encoded % m, static_cast<std::uint32_t>(encoded / m)};
}

Sketch make_element_sketch(std::span<const FieldElement> elements, const SketchParams& params) {
    const u64 bound = params.field().element_bound();
    std::vector<FieldElement> sorted(elements.begin(), elements.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(Errc::InvalidArgument, "duplicate element in set");
    }
    if (!sorted.empty() && sorted.back() >= bound) {
        throw Error(Errc::KeyOutOfRange, "element " + std::to_string(sorted.back()) + " >= " + std::to_string(bound));
    }
    const auto& field = params.prime_field();
    std::vector<FieldElement> evals(params.size());
    for (std::size_t j = 0; j < evals.size(); ++j) {
        const FieldElement x = params.point(j);
        FieldElement acc = 1;
        for (FieldElement e : elements) acc = field.mul(acc, x - e);  // x > e always
        evals[j] = acc;
    }
    return Sketch(params, std::move(evals), elements.size());
}

Sketch make_sketch(std::span<const u64> keys, const SketchParams& params) {
    for (u64 k : keys) {
        if (k >= params.m()) throw Error(Errc::KeyOutOfRange, "key " + std::to_string(k) + " >= m");
    }
    return make_element_sketch(keys, params);
}

Sketch make_owner_sketch(std::span<const OwnerElement> elements, const SketchParams& params) {
    std::vector<FieldElement> encoded;
    encoded.reserve(elements.size());
    for (const auto& e : elements) encoded.push_back(encode_owner(e.value, e.owner, params.field()));
    return make_element_sketch(encoded, params);
}

Sketch pointwise_mul(const Sketch& a, const Sketch& b) {
    require_same_params(a, b);
    const auto& field = a.params().prime_field();
    std::vector<FieldElement> out(a.evals().size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = field.mul(a.evals()[j], b.evals()[j]);
    return Sketch(a.params(), std::move(out), a.cardinality() + b.cardinality());
}

Sketch pointwise_div(const Sketch& a, const Sketch& b) {
    require_same_params(a, b);
    const auto& field = a.params().prime_field();
    std::vector<FieldElement> out(a.evals().size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = field.div(a.evals()[j], b.evals()[j]);
    return Sketch(a.params(), std::move(out), a.cardinality() - b.cardinality());
}

SetDifference recover_difference(const Sketch& a, const Sketch& b) {
    require_same_params(a, b);
    const auto& params = a.params();
    const auto& field = params.prime_field();
    const long long delta = static_cast<long long>(a.cardinality()) - static_cast<long long>(b.cardinality());
    const std::vector<Point> samples = ratio_samples(a, b);
    std::mt19937_64 rng(kRootFindingSeed);
    try {
        const RationalFunction ratio = rational_interpolate(samples, delta, params.d(), field);
        SetDifference out;
        out.a_minus_b = roots_within(ratio.num, field, params.m(), rng);
        out.b_minus_a = roots_within(ratio.den, field, params.m(), rng);
        return out;
    } catch (const Error& e) {
        if (e.code() == Errc::DifferenceBoundExceeded || !is_decode_failure(e.code())) throw;
        rethrow_as_bound_exceeded(e);
    }
}

Sketch combine_union(const Sketch& a, const Sketch& b) {
    const SetDifference diff = recover_difference(b, a);
    if (diff.a_minus_b.empty()) return a;
    return pointwise_mul(a, make_sketch(diff.a_minus_b, a.params()));
}

std::vector<u64> recover_missing(const Sketch& union_sketch, const Sketch& own) {
    return missing_within(union_sketch, own, union_sketch.params().m());
}

std::vector<FieldElement> recover_missing_elements(const Sketch& superset, const Sketch& subset) {
    return missing_within(superset, subset, superset.params().field().element_bound());
}

}  // namespace setrecon
