#include "humbench/sha256.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "humbench/error.hpp"
#include "humbench/text.hpp"

namespace humbench {

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
        throw Error("sha256: OpenSSL digest failed");
    }
    return text::hex_encode(std::string_view(reinterpret_cast<const char*>(md.data()), len));
}

}  // namespace humbench
