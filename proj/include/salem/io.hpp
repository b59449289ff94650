#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "salem/approxident.hpp"
#include "salem/configsearch.hpp"
#include "salem/fractal.hpp"
#include "salem/grid.hpp"
#include "salem/linsys.hpp"
#include "salem/multiform.hpp"

namespace salem::io {

using json = nlohmann::json;

// {"n","k","m","B"|"A"}; entries are numbers or exact rational strings "p/q".
MatrixSystem system_from_json(const json& j);
json system_to_json(const MatrixSystem& system);
MatrixSystem read_system(const std::string& path);

json to_json(const NondegeneracyReport& report);
json to_json(const LambdaResult& result);
json to_json(const DecayFit& fit);
json to_json(const BallConstant& ball);
json to_json(const CEpsilonResult& result);
json to_json(const ConfigurationHit& hit);

// Header line {"n","N","format":"f64-le"} then N^n little-endian doubles;
// pure JSON ({"n","N","format":"json","weights"}) when requested and N <= 64.
void write_measure(const std::string& path, const GridMeasure& measure, bool pure_json = false);
GridMeasure read_measure(const std::string& path);
// Same envelope, raw cell values without the probability normalisation check.
std::vector<double> read_grid_values(const std::string& path, int& n, std::size_t& N);

// Header xi_1..xi_n,re,im.
void write_fourier_csv(const std::string& path, const FourierSample& sample);
FourierSample read_fourier_csv(const std::string& path);

// {"n","points","tol"?} or a grid envelope whose nonzero cells are occupied.
PointSet read_point_set(const std::string& path, double tol);
void write_point_set(const std::string& path, const PointSet& set);

void write_hits_csv(const std::string& path, const std::vector<ConfigurationHit>& hits);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace salem::io
