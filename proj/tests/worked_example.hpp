// The two-feature hand-worked example: input, initial weights and printed
// intermediate values (2 decimal places).
#ifndef MFCNN_TESTS_PAPER_EXAMPLE_HPP
#define MFCNN_TESTS_PAPER_EXAMPLE_HPP

#include <vector>

#include "mfcnn/network.hpp"

namespace example {

inline const std::vector<double> x = {-0.18, -0.28, -0.23, -0.32, 0.45, 0.45, 0.45, -0.35};
inline const std::vector<double> t = {1.0, 0.0};

inline const std::vector<std::vector<double>> w1 = {
    {-0.07, -0.01, -1.47}, {0.44, 0.14, -0.30}, {1.15, -1.01, -1.83}};

// w2[k][n], columns of the printed transposed matrix.
inline const std::vector<std::vector<double>> w2 = {
    {-0.47, -0.06, -0.05, -0.81, 0.62, -0.18}, {0.02, 0.12, -0.15, -0.07, -0.87, -0.53}};

inline const std::vector<std::vector<double>> y1 = {{0.35, 0.49, -0.65, -0.65, -0.69, 0.48},
                                                    {-0.05, -0.06, -0.28, -0.21, 0.13, 0.37},
                                                    {0.48, 0.50, -0.77, -1.66, -0.76, 0.71}};
inline const std::vector<std::vector<double>> relu1 = {{0.35, 0.49, 0, 0, 0, 0.48},
                                                       {0, 0, 0, 0, 0.13, 0.37},
                                                       {0.48, 0.50, 0, 0, 0, 0.71}};
inline const std::vector<std::vector<int>> mask_relu = {
    {1, 1, 0, 0, 0, 1}, {0, 0, 0, 0, 1, 1}, {1, 1, 0, 0, 0, 1}};
inline const std::vector<std::vector<int>> mask_pool = {
    {0, 1, 0, 0, 0, 1}, {1, 0, 0, 0, 0, 1}, {0, 1, 0, 0, 0, 1}};
inline const std::vector<std::vector<double>> pooled = {{0.49, 0.48}, {0.00, 0.37}, {0.50, 0.71}};
inline const std::vector<double> flat = {0.49, 0.48, 0.00, 0.37, 0.50, 0.71};
inline const std::vector<double> y2 = {-0.38, -0.77};
inline const std::vector<double> p = {0.60, 0.40};
inline const std::vector<double> delta2 = {-0.40, 0.40};

inline const std::vector<double> back_delta = {0.18, 0.06, -0.04, 0.29, -0.62, -0.16};
inline const std::vector<std::vector<double>> repositioned = {
    {0, 0.18, 0, 0, 0, 0.06}, {0, 0, 0, 0, 0, 0.29}, {0, -0.62, 0, 0, 0, -0.16}};
inline const std::vector<double> bias_sums = {0.24, 0.29, -0.78};

inline mfcnn::Network network() {
  mfcnn::ConvLayer conv(3, 1, 3);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t m = 0; m < 3; ++m) conv.weight(k, 0, m) = w1[k][m];
  mfcnn::DenseLayer dense(2, 6);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < 6; ++n) dense.weight(k, n) = w2[k][n];
  return mfcnn::Network(8, {mfcnn::ConvBlock{conv, 0.0, 3}}, {mfcnn::DenseBlock{dense, false, 0.0}},
                        mfcnn::LossKind::SoftmaxCrossEntropy);
}

}  // namespace example

#endif  // MFCNN_TESTS_PAPER_EXAMPLE_HPP
