#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kffnn/ffnn.hpp"
#include "kffnn/lstm.hpp"
#include "kffnn/rnn.hpp"

namespace kffnn {

/// Any trained regressor. An FfnnModel is evaluated per segment (the k-FFNN
/// path); the recurrent models consume the whole clip.
using AnyModel = std::variant<FfnnModel, RnnModel, LstmModel>;

std::string_view model_kind_name(const AnyModel& model) noexcept;
std::size_t model_input_dim(const AnyModel& model) noexcept;

/// A named weight matrix inside a model, for code that treats all weights
/// uniformly (finite-difference checks, serialisation).
struct ParamRef {
  std::string name;
  Matrix* matrix;
};
struct ConstParamRef {
  std::string name;
  const Matrix* matrix;
};

std::vector<ParamRef> parameters(FfnnModel& m);
std::vector<ParamRef> parameters(RnnModel& m);
std::vector<ParamRef> parameters(LstmModel& m);
std::vector<ConstParamRef> parameters(const FfnnModel& m);
std::vector<ConstParamRef> parameters(const RnnModel& m);
std::vector<ConstParamRef> parameters(const LstmModel& m);

/// Gradients listed in the same order as parameters() of the matching model.
std::vector<const Matrix*> gradient_list(const FfnnGradients& g);
std::vector<const Matrix*> gradient_list(const RnnGradients& g);
std::vector<const Matrix*> gradient_list(const LstmGradients& g);

}  // namespace kffnn
