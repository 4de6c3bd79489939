#pragma once

#include <string>
#include <vector>

#include "cpdkit/kruskal.hpp"
#include "cpdkit/solver.hpp"

namespace cpdkit {

/// Text tensor format: "TNSR 1" /  "order N" / "dims I1 .. IN" followed by
/// one scalar per line in first-index-fastest order, 17 significant digits.
void write_tensor(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor(const std::string& path);

/// Factor matrices use the same numeric format under a "FCTR 1" header with
/// "rows"/"cols" lines (column-major values); weights live in a "LMBD 1" file.
void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);
void write_lambda(const std::string& path, const Vector& lambda);
Vector read_lambda(const std::string& path);

/// Model file set: <prefix>.A<n>.fctr per mode plus <prefix>.lambda.lmbd.
void write_model(const std::string& prefix, const KruskalModel& m);
KruskalModel read_model(const std::string& prefix);

/// Trace CSV: '#'-comment header lines, then
/// sweep,mode,residual,fitness,cond,delta,threshold,seconds rows.
/// `cond` is left empty for rows where it was not computed.
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace,
                     const std::vector<std::string>& header_comments);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

}  // namespace cpdkit
