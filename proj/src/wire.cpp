#include "setrecon/wire.hpp"

#include <string>

namespace setrecon {

namespace {

constexpr std::uint32_t kMagic = 0x5243534BU;  // "RCSK"

template <typename T>
void put_be(std::vector<std::uint8_t>& out, T value) {
    for (int shift = static_cast<int>(sizeof(T) * 8) - 8; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(value >> shift));
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw Error(Errc::MalformedMessage, "truncated message");
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value = static_cast<T>((value << 8) | bytes_[pos_ + i]);
        pos_ += sizeof(T);
        return value;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t message_size(const SketchParams& params) noexcept { return kHeaderBytes + 8 * params.size(); }

std::vector<std::uint8_t> encode_message(const Sketch& sketch, bool owner_encoded) {
    const auto& f = sketch.params().field();
    std::vector<std::uint8_t> out;
    out.reserve(message_size(sketch.params()));
    put_be<std::uint32_t>(out, kMagic);
    out.push_back(kWireVersion);
    out.push_back(owner_encoded ? kFlagOwnerEncoded : 0);
    put_be<std::uint64_t>(out, f.q);
    put_be<std::uint32_t>(out, f.d);
    put_be<std::uint32_t>(out, f.c);
    put_be<std::uint64_t>(out, f.m);
    put_be<std::uint32_t>(out, f.owner_count);
    put_be<std::uint64_t>(out, sketch.cardinality());
    for (FieldElement v : sketch.evals()) put_be<std::uint64_t>(out, v);
    return out;
}

SketchMessage decode_message(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    const std::uint32_t magic = in.get<std::uint32_t>();
    if (magic != kMagic) throw Error(Errc::MalformedMessage, "bad magic");
    const auto version = in.get<std::uint8_t>();
    if (version != kWireVersion) {
        throw Error(Errc::MalformedMessage, "unsupported version " + std::to_string(version));
    }
    const auto flags = in.get<std::uint8_t>();
    if ((flags & ~kFlagOwnerEncoded) != 0) throw Error(Errc::MalformedMessage, "unknown flag bits");

    FieldParams field;
    field.q = in.get<std::uint64_t>();
    field.d = in.get<std::uint32_t>();
    field.c = in.get<std::uint32_t>();
    field.m = in.get<std::uint64_t>();
    field.owner_count = in.get<std::uint32_t>();
    const u64 cardinality = in.get<std::uint64_t>();

    const u64 count = u64{field.d} + field.c + 1;
    if (in.remaining() != count * 8) {
        throw Error(Errc::MalformedMessage, "expected " + std::to_string(count) + " evaluations, payload has " +
                                                std::to_string(in.remaining()) + " bytes");
    }
    try {
        SketchParams params(field);
        std::vector<FieldElement> evals(count);
        for (auto& v : evals) v = in.get<std::uint64_t>();
        return {Sketch(std::move(params), std::move(evals), cardinality), (flags & kFlagOwnerEncoded) != 0};
    } catch (const Error& e) {
        if (e.code() == Errc::MalformedMessage) throw;
        throw Error(Errc::MalformedMessage, e.what());
    }
}

}  // namespace setrecon
