#include "ecdl/normal.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "ecdl/error.hpp"

namespace ecdl {

namespace {
const boost::math::normal_distribution<double> kStandardNormal{0.0, 1.0};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_upper_quantile(double q) {
    require(q > 0.0 && q < 1.0, ErrorCode::InvalidArgument, "quantile level must be in (0, 1)");
    return boost::math::quantile(boost::math::complement(kStandardNormal, q));
}

double two_sided_pvalue(double z) {
    return std::max(kPValueFloor, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace ecdl
