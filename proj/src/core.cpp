#include "medusa/core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace medusa {

namespace {

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void append_field(std::string& out, const std::string& s) {
    append_u64_le(out, s.size());
    out.append(s);
}

}  // namespace

std::string Digest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::optional<Digest> Digest::from_hex(const std::string& hex) {
    if (hex.size() != 64) return std::nullopt;
    Digest d;
    for (std::size_t i = 0; i < 32; ++i) {
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            return -1;
        };
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, d.bytes.data(), &len) != 1 || len != d.bytes.size()) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 computation failed");
    }
    EVP_MD_CTX_free(ctx);
    return d;
}

Digest sha256(const std::string& data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Digest canonical_digest(std::vector<DataPartition> partitions, const JobSpec& job) {
    if (partitions.empty()) {
        throw std::invalid_argument("canonical_digest: empty partition set");
    }
    std::sort(partitions.begin(), partitions.end(),
              [](const DataPartition& a, const DataPartition& b) { return a.id < b.id; });

    // Length-prefixed encoding so no two distinct inputs share a byte string.
    std::string enc;
    enc.append("medusa.job.v1");
    append_u64_le(enc, partitions.size());
    for (const DataPartition& p : partitions) {
        append_field(enc, p.id);
        append_u64_le(enc, p.content_seed);
    }
    append_field(enc, job.id);
    return sha256(enc);
}

}  // namespace medusa
