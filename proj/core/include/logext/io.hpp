#ifndef LOGEXT_IO_HPP
#define LOGEXT_IO_HPP

#include <string>

namespace logext {

// Shortest decimal form that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double value);

}  // namespace logext

#endif  // LOGEXT_IO_HPP
