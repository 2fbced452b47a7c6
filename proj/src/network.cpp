#include "sludec/network.hpp"

namespace sludec {

ModelVariant parse_variant(const std::string& name) {
  if (name == "cnn") return ModelVariant::cnn;
  if (name == "cnn_lstm_w1") return ModelVariant::cnn_lstm_w1;
  if (name == "cnn_lstm_w4") return ModelVariant::cnn_lstm_w4;
  if (name == "cnn_lstm_w") return ModelVariant::cnn_lstm_w;
  if (name == "lstm_all") return ModelVariant::lstm_all;
  throw ConfigError("unknown model variant '" + name +
                    "' (expected cnn, cnn_lstm_w1, cnn_lstm_w4, cnn_lstm_w or lstm_all)");
}

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::cnn: return "cnn";
    case ModelVariant::cnn_lstm_w1: return "cnn_lstm_w1";
    case ModelVariant::cnn_lstm_w4: return "cnn_lstm_w4";
    case ModelVariant::cnn_lstm_w: return "cnn_lstm_w";
    case ModelVariant::lstm_all: return "lstm_all";
  }
  return "?";
}

ContextMode context_mode(ModelVariant v) {
  switch (v) {
    case ModelVariant::cnn: return ContextMode::none;
    case ModelVariant::cnn_lstm_w1: return ContextMode::last_1;
    case ModelVariant::cnn_lstm_w4: return ContextMode::last_4;
    case ModelVariant::cnn_lstm_w: return ContextMode::all;
    case ModelVariant::lstm_all: return ContextMode::all;
  }
  return ContextMode::none;
}

CombineMode combine_mode(ModelVariant v) {
  switch (v) {
    case ModelVariant::cnn: return CombineMode::identity;
    case ModelVariant::lstm_all: return CombineMode::lstm_input;
    default: return CombineMode::tanh;
  }
}

}  // namespace sludec
