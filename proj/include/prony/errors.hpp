#pragma once

#include <stdexcept>
#include <string>

namespace prony {

// Base of all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct shape_error : error { using error::error; };
struct degenerate_nodes : error { using error::error; };
struct zero_amplitude : error { using error::error; };
struct not_normalized : error { using error::error; };
struct bad_scale : error { using error::error; };
struct bad_noise : error { using error::error; };
struct zero_mass : error { using error::error; };
struct no_real_solution : error { using error::error; };
struct bad_lambda : error { using error::error; };

} // namespace prony
