#include "woldlab/kernels.hpp"

#include <omp.h>

#include <Eigen/SparseCore>

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <string>

namespace woldlab::kernels {

int thread_count() {
    const char* env = std::getenv("WOLDLAB_THREADS");
    if (env != nullptr) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return std::max(1, omp_get_max_threads());
}

Exec default_exec() { return thread_count() > 1 ? Exec::Parallel : Exec::Serial; }

namespace {

using SparseOp = Eigen::SparseMatrix<std::complex<double>>;

// Shifts, twists and their products are mostly zeros; a sparse left factor pays off
// once the right factor has a few columns.
bool worth_sparse(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.size() < 4096 || b.cols() < 4) return false;
    const Eigen::Index limit = a.size() / 10;
    Eigen::Index nnz = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != std::complex<double>(0.0, 0.0) && ++nnz > limit) return false;
    return true;
}

}  // namespace

Eigen::MatrixXcd gemm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, Exec exec) {
    Eigen::MatrixXcd c(a.rows(), b.cols());
    if (a.cols() == 0) {
        c.setZero();
        return c;
    }
    const bool sparse = worth_sparse(a, b);
    SparseOp as;
    if (sparse) as = a.sparseView();
    if (exec == Exec::Serial || b.cols() < 2) {
        if (sparse)
            c.noalias() = as * b;
        else
            c.noalias() = a * b;
        return c;
    }
    const int nt = thread_count();
    const long panels = std::min<long>(nt, b.cols());
    const long width = (b.cols() + panels - 1) / panels;
#pragma omp parallel for num_threads(nt) schedule(static)
    for (long p = 0; p < panels; ++p) {
        long c0 = p * width;
        long w = std::min(width, static_cast<long>(b.cols()) - c0);
        if (w <= 0) continue;
        if (sparse)
            c.middleCols(c0, w).noalias() = as * b.middleCols(c0, w);
        else
            c.middleCols(c0, w).noalias() = a * b.middleCols(c0, w);
    }
    return c;
}

Eigen::MatrixXcd gemm_reference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            const std::complex<double> bkj = b(k, j);
            for (Eigen::Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
        }
    return c;
}

Eigen::MatrixXcd gram(const Eigen::MatrixXcd& q, Exec exec) {
    const long n = q.cols();
    Eigen::MatrixXcd g(n, n);
    if (exec == Exec::Serial) {
        for (long j = 0; j < n; ++j)
            for (long i = 0; i <= j; ++i) g(i, j) = q.col(i).dot(q.col(j));
    } else {
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic, 4)
        for (long j = 0; j < n; ++j)
            for (long i = 0; i <= j; ++i) g(i, j) = q.col(i).dot(q.col(j));
    }
    for (long j = 0; j < n; ++j)
        for (long i = j + 1; i < n; ++i) g(i, j) = std::conj(g(j, i));
    return g;
}

namespace {
double block_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.cols() == 0 || b.cols() == 0) return 0.0;
    Eigen::MatrixXcd c = a.adjoint() * b;
    Eigen::MatrixXcd g = c.cols() <= c.rows() ? Eigen::MatrixXcd(c.adjoint() * c) : Eigen::MatrixXcd(c * c.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}
}  // namespace

double max_pairwise_cosine(const std::vector<Eigen::MatrixXcd>& blocks, Exec exec) {
    const long n = static_cast<long>(blocks.size());
    std::vector<std::pair<long, long>> pairs;
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j)
            if (blocks[i].cols() > 0 && blocks[j].cols() > 0) pairs.emplace_back(i, j);
    const long np = static_cast<long>(pairs.size());
    double best = 0.0;
    if (exec == Exec::Serial) {
        for (long k = 0; k < np; ++k)
            best = std::max(best, block_norm(blocks[pairs[k].first], blocks[pairs[k].second]));
    } else {
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic) reduction(max : best)
        for (long k = 0; k < np; ++k)
            best = std::max(best, block_norm(blocks[pairs[k].first], blocks[pairs[k].second]));
    }
    return best;
}

void for_each_index(long count, Exec exec, const std::function<void(long)>& body) {
    if (exec == Exec::Serial || count < 2) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr first;
    std::mutex guard;
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace woldlab::kernels
