#ifndef JACKSTRAW_DISTRIBUTIONS_HPP
#define JACKSTRAW_DISTRIBUTIONS_HPP

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>

namespace jackstraw {

/// Upper tail P(F >= f) of the F(df_num, df_den) distribution; +inf maps to 0.
inline double f_upper_tail(double f, double df_num, double df_den) {
    if (std::isinf(f)) return 0.0;
    if (!(f > 0.0)) return 1.0;
    const boost::math::fisher_f_distribution<double> dist(df_num, df_den);
    return boost::math::cdf(boost::math::complement(dist, f));
}

} // namespace jackstraw

#endif
