#pragma once

#include <Eigen/Dense>
#include <exception>
#include <functional>
#include <vector>

namespace woldlab::kernels {

enum class Exec { Serial, Parallel };

// Worker count from WOLDLAB_THREADS (unset or 0 means the OpenMP default).
int thread_count();
Exec default_exec();

// C = A * B. The parallel form splits B into column panels, one per thread.
Eigen::MatrixXcd gemm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, Exec exec);
// Plain triple loop, kept as an oracle for the two forms above.
Eigen::MatrixXcd gemm_reference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Q^* Q, upper triangle computed by column pairs then mirrored.
Eigen::MatrixXcd gram(const Eigen::MatrixXcd& q, Exec exec);

// Largest ||Q_a^* Q_b|| over pairs of distinct blocks.
double max_pairwise_cosine(const std::vector<Eigen::MatrixXcd>& blocks, Exec exec);

// Runs body(i) for i in [0, count). The first exception thrown by any worker is rethrown.
void for_each_index(long count, Exec exec, const std::function<void(long)>& body);

}  // namespace woldlab::kernels
