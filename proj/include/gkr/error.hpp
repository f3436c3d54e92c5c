#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gkr {

enum class errc {
    invalid_graph,
    invalid_laplacian,
    dimension_mismatch,
    invalid_argument,
    singular_system,
    near_singular,
    degenerate_kernel,
    not_positive_definite,
    cannot_rescale,
    convergence,
    io,
    parse,
    schema,
};

std::string_view to_string(errc code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so the
/// CLI can report it as machine-readable JSON.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace gkr
