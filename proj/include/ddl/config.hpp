#pragma once

#include <cstddef>
#include <optional>

namespace ddl {

/// Where the training sequence is split for the differential codelength.
/// Either a fraction `alpha` of n or an explicit prefix length `m`.
struct DdlConfig {
    std::optional<double> alpha = 0.5;
    std::optional<std::size_t> m;
    std::size_t block_count = 1;
    std::size_t min_prefix = 1;

    static DdlConfig with_alpha(double a) {
        DdlConfig c;
        c.alpha = a;
        return c;
    }
    static DdlConfig with_prefix(std::size_t prefix) {
        DdlConfig c;
        c.alpha.reset();
        c.m = prefix;
        return c;
    }

    /// Prefix length for a dataset of n samples; m = floor(alpha * n) unless
    /// given explicitly. Throws ConfigError unless min_prefix <= m < n and m > 0.
    [[nodiscard]] std::size_t resolve(std::size_t n) const;
};

} // namespace ddl
