#pragma once

#include <iosfwd>
#include <string>

#include "eit/forward.hpp"

namespace eit {

/// Version-tagged structured-text Cauchy dataset. The header records the
/// mesh hash, measured-subset name and vertices, noise level, seed and K;
/// pattern supports and traces follow as nodal arrays printed with full
/// precision, so save/load round-trips bit-exactly.
void save_dataset(const CauchyDataSet& data, const std::string& path);
void save_dataset(const CauchyDataSet& data, std::ostream& out);
CauchyDataSet load_dataset(const std::string& path);
CauchyDataSet load_dataset(std::istream& in, const std::string& name);

}  // namespace eit
