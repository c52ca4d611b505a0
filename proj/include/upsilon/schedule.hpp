#pragma once

#include <cstdint>
#include <string>

#include "upsilon/dyadic.hpp"
#include "upsilon/errors.hpp"

namespace upsilon {

// The per-cycle weight sequence w_k the harness multiplies raw rewards by to
// make any environment reward-summable: sum_k w_k <= 1 exactly.
//
//   halving      w_k = 2^-k              (dyadic; the default)
//   geometric    w_k = (1-g) g^(k-1)
//   telescoping  w_k = 1 / (k (k+1))
//
// Non-dyadic weights are rounded down onto the 2^-40 grid before use, which
// preserves the exact bound. Tail bounds are quoted for the ideal weights and
// therefore stay valid upper bounds for the rounded ones.
class BoundingSchedule {
public:
    enum class Kind { Halving, Geometric, Telescoping };

    static constexpr unsigned kWeightGridBits = 40;
    // Extra grid bits for products with non-dyadic raw rewards (n/255).
    static constexpr unsigned kRewardGridBits = 40;

    BoundingSchedule() : kind_(Kind::Halving) {}

    static BoundingSchedule halving() { return BoundingSchedule(Kind::Halving, Rat()); }
    static BoundingSchedule telescoping() { return BoundingSchedule(Kind::Telescoping, Rat()); }
    static BoundingSchedule geometric(const Rat& gamma) {
        if (gamma <= 0 || gamma >= 1) throw UsageError("geometric schedule needs 0 < gamma < 1");
        return BoundingSchedule(Kind::Geometric, gamma);
    }

    Kind kind() const { return kind_; }
    const Rat& gamma() const { return gamma_; }

    // Ideal weight w_k, k >= 1.
    Rat ideal_weight(std::size_t k) const {
        switch (kind_) {
            case Kind::Halving: return Rat(1, BigInt(1) << k);
            case Kind::Geometric: {
                Rat w = 1 - gamma_;
                for (std::size_t i = 1; i < k; ++i) w *= gamma_;
                return w;
            }
            case Kind::Telescoping: return Rat(1, BigInt(k) * BigInt(k + 1));
        }
        throw InternalError("unreachable schedule kind");
    }

    // The weight actually applied (grid-rounded when not dyadic).
    Dyadic applied_weight(std::size_t k) const {
        if (kind_ == Kind::Halving) return Dyadic::pow2(static_cast<unsigned>(k));
        return Dyadic::floor_to_grid(ideal_weight(k), kWeightGridBits);
    }

    // w_k * raw, rounded down onto a fixed dyadic grid when the product is
    // not dyadic. raw must lie in [0,1].
    Dyadic apply(const Rat& raw, std::size_t k) const {
        if (raw < 0 || raw > 1) throw std::invalid_argument("raw reward outside [0,1]");
        Dyadic w = applied_weight(k);
        if (raw == 0) return Dyadic::zero();
        if (raw == 1) return w;
        return Dyadic::floor_to_grid(w.to_rat() * raw, w.exponent() + kRewardGridBits);
    }

    // Exact tail sum_{k>H} w_k of the ideal weights.
    Rat truncation_bound(std::size_t horizon) const {
        switch (kind_) {
            case Kind::Halving: return Rat(1, BigInt(1) << horizon);
            case Kind::Geometric: {
                Rat tail = 1;
                for (std::size_t i = 0; i < horizon; ++i) tail *= gamma_;
                return tail;
            }
            case Kind::Telescoping: return Rat(1, BigInt(horizon) + 1);
        }
        throw InternalError("unreachable schedule kind");
    }

    std::string id() const {
        switch (kind_) {
            case Kind::Halving: return "halving";
            case Kind::Geometric: return "geometric:" + format_rational(gamma_);
            case Kind::Telescoping: return "telescoping";
        }
        throw InternalError("unreachable schedule kind");
    }

    static BoundingSchedule from_id(const std::string& id) {
        if (id == "halving") return halving();
        if (id == "telescoping") return telescoping();
        if (id.rfind("geometric:", 0) == 0) {
            try {
                return geometric(parse_rational(id.substr(10)));
            } catch (const std::invalid_argument& e) {
                throw UsageError("bad schedule id '" + id + "': " + e.what());
            }
        }
        throw UsageError("unknown schedule id '" + id +
                         "' (valid: halving, geometric:<gamma>, telescoping)");
    }

private:
    BoundingSchedule(Kind kind, Rat gamma) : kind_(kind), gamma_(std::move(gamma)) {}

    Kind kind_;
    Rat gamma_;
};

}  // namespace upsilon
