#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "botflow/botflow.h"
#include "test_support.hpp"

using testing_support::TempDir;
using testing_support::read_text;
using testing_support::write_text;

extern "C" int c_header_check_run(void);

namespace {

const char* kHeader = "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,TotBytes,SrcBytes,Label\n";

}  // namespace

TEST(CApi, HeaderCompilesAsC) { EXPECT_EQ(c_header_check_run(), 0); }

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(bf_status_name(BF_OK), "OK");
  EXPECT_STRNE(bf_status_name(BF_E_IO), bf_status_name(BF_E_MALFORMED_ROW));
  EXPECT_NE(std::strlen(bf_version()), 0u);
}

TEST(CApi, NullArgumentsAreRejected) {
  bf_flows* flows = nullptr;
  EXPECT_EQ(bf_flows_read(nullptr, 0, &flows), BF_E_INVALID_ARGUMENT);
  EXPECT_NE(std::string(bf_last_error()).size(), 0u);
  EXPECT_EQ(bf_matrix_build(nullptr, nullptr, 0, nullptr), BF_E_INVALID_ARGUMENT);
  EXPECT_EQ(bf_model_fit(nullptr, nullptr, nullptr, nullptr), BF_E_INVALID_ARGUMENT);
  EXPECT_EQ(bf_metrics_from_counts(1, 0, 0, 0, nullptr), BF_E_INVALID_ARGUMENT);
  EXPECT_EQ(bf_flows_count(nullptr), 0u);
  bf_flows_free(nullptr);
  bf_matrix_free(nullptr);
  bf_model_free(nullptr);
}

TEST(CApi, ErrorStatusesMapFromCore) {
  bf_flows* flows = nullptr;
  EXPECT_EQ(bf_flows_read("/nonexistent/file.binetflow", 0, &flows), BF_E_IO);
  EXPECT_EQ(flows, nullptr);

  TempDir dir;
  write_text(dir.file("bad.csv"), std::string(kHeader) + "2011/08/10 09:46:53.047277,3.1,tcp,1.2.3.4,80\n");
  EXPECT_EQ(bf_flows_read(dir.file("bad.csv").c_str(), 1, &flows), BF_E_MALFORMED_ROW);
  EXPECT_NE(std::string(bf_last_error()).find("2"), std::string::npos);
  ASSERT_EQ(bf_flows_read(dir.file("bad.csv").c_str(), 0, &flows), BF_OK);
  bf_ingest_stats st{};
  ASSERT_EQ(bf_flows_stats(flows, &st), BF_OK);
  EXPECT_EQ(st.skipped_rows, 1u);
  EXPECT_EQ(st.first_error_line, 2u);
  EXPECT_EQ(bf_flows_count(flows), 0u);
  bf_flows_free(flows);

  bf_scenario_info info{};
  EXPECT_EQ(bf_scenario_info_get(14, &info), BF_E_UNKNOWN_SCENARIO);
  ASSERT_EQ(bf_scenario_info_get(9, &info), BF_OK);
  EXPECT_EQ(info.scenario_id, 9);

  unsigned mask = 0;
  EXPECT_EQ(bf_parse_class_set("botnet,martian", &mask), BF_E_INVALID_ARGUMENT);

  bf_model* model = nullptr;
  write_text(dir.file("m.json"), "{\"schema_version\": 1, \"weights\": [");
  EXPECT_EQ(bf_model_load(dir.file("m.json").c_str(), &model), BF_E_CORRUPT_MODEL);
  write_text(dir.file("m.json"), "{\"schema_version\": 3}");
  EXPECT_EQ(bf_model_load(dir.file("m.json").c_str(), &model), BF_E_SCHEMA_VERSION);

  uint64_t n = 0;
  bf_synth_options so{1, 0, 60};
  EXPECT_EQ(bf_synth("scenario5", &so, dir.file("s.csv").c_str(), &n), BF_E_INVALID_ARGUMENT);
  EXPECT_EQ(bf_report_histogram(dir.file("m.json").c_str(), "test_precision", 0, 0, 1, dir.file("h.csv").c_str()),
            BF_E_BAD_BINS);
}

TEST(CApi, MetricsFromCounts) {
  bf_metrics m{};
  ASSERT_EQ(bf_metrics_from_counts(205, 65, 26, 0, &m), BF_OK);
  EXPECT_NEAR(m.precision, 205.0 / 270.0, 1e-15);
  EXPECT_NEAR(m.recall, 205.0 / 231.0, 1e-15);
  ASSERT_EQ(bf_metrics_from_counts(0, 0, 0, 4, &m), BF_OK);
  EXPECT_EQ(m.precision_undefined, 1);
  EXPECT_EQ(m.recall_undefined, 1);
}

TEST(CApi, EndToEndRoundTrip) {
  TempDir dir;
  const std::string flows_path = dir.file("s.binetflow");
  bf_synth_options so{7, 0, 900};
  uint64_t produced = 0;
  ASSERT_EQ(bf_synth("scenario9", &so, flows_path.c_str(), &produced), BF_OK) << bf_last_error();
  ASSERT_GT(produced, 0u);

  bf_flows* flows = nullptr;
  ASSERT_EQ(bf_flows_read(flows_path.c_str(), 1, &flows), BF_OK) << bf_last_error();
  EXPECT_EQ(bf_flows_count(flows), produced);
  bf_label_distribution dist{};
  ASSERT_EQ(bf_flows_distribution(flows, &dist), BF_OK);
  EXPECT_EQ(dist.total, produced);
  EXPECT_NE(std::string(bf_flows_stats_json(flows)).find("\"total\""), std::string::npos);

  bf_window_config wc{90, 15, 0};
  bf_matrix* m = nullptr;
  ASSERT_EQ(bf_matrix_build(flows, &wc, 0, &m), BF_OK) << bf_last_error();
  EXPECT_EQ(bf_matrix_cols(m), 21u);
  EXPECT_STREQ(bf_matrix_feature_name(m, 0), "flow_count");
  EXPECT_EQ(bf_matrix_feature_name(m, 21), nullptr);
  EXPECT_GT(bf_matrix_positives(m), 0u);
  double v = 0;
  EXPECT_EQ(bf_matrix_value(m, bf_matrix_rows(m), 0, &v), BF_E_INVALID_ARGUMENT);

  ASSERT_EQ(bf_matrix_write_csv(m, dir.file("f.csv").c_str()), BF_OK);
  bf_matrix* back = nullptr;
  ASSERT_EQ(bf_matrix_read_csv(dir.file("f.csv").c_str(), &back), BF_OK);
  EXPECT_EQ(bf_matrix_rows(back), bf_matrix_rows(m));

  bf_train_options to;
  bf_train_options_default(&to);
  EXPECT_EQ(to.max_iter, 2000);
  EXPECT_EQ(to.threshold, 0.5);
  bf_model* model = nullptr;
  bf_train_summary sum{};
  ASSERT_EQ(bf_model_fit(m, &to, &model, &sum), BF_OK) << bf_last_error();
  EXPECT_GT(sum.iterations_run, 0);
  EXPECT_TRUE(std::isfinite(sum.final_loss));

  bf_metrics met{};
  ASSERT_EQ(bf_evaluate(model, m, &met), BF_OK);
  EXPECT_EQ(met.tp + met.fp + met.fn + met.tn, bf_matrix_rows(m));
  EXPECT_GT(met.f1, 0.5);

  ASSERT_EQ(bf_model_save(model, dir.file("m.json").c_str()), BF_OK);
  bf_model* loaded = nullptr;
  ASSERT_EQ(bf_model_load(dir.file("m.json").c_str(), &loaded), BF_OK);
  std::vector<double> w1(bf_model_feature_count(model)), w2(w1.size());
  double b1 = 0, b2 = 0;
  ASSERT_EQ(bf_model_weights(model, w1.data(), w1.size(), &b1), BF_OK);
  ASSERT_EQ(bf_model_weights(loaded, w2.data(), w2.size(), &b2), BF_OK);
  EXPECT_EQ(w1, w2);
  EXPECT_EQ(b1, b2);
  EXPECT_EQ(bf_model_weights(model, w1.data(), w1.size() - 1, &b1), BF_E_LENGTH_MISMATCH);

  std::vector<double> p(bf_matrix_rows(back));
  ASSERT_EQ(bf_model_predict_proba(loaded, back, p.data(), p.size()), BF_OK);
  for (double x : p) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
  }

  ASSERT_EQ(bf_evaluate_to_file(loaded, back, dir.file("r.json").c_str()), BF_OK);
  EXPECT_NE(read_text(dir.file("r.json")).find("\"precision\""), std::string::npos);

  bf_select_options sel;
  bf_select_options_default(&sel);
  sel.corr_threshold = 0.95;
  bf_matrix* reduced = nullptr;
  ASSERT_EQ(bf_select(m, &sel, &reduced, dir.file("sel.json").c_str()), BF_OK) << bf_last_error();
  EXPECT_LT(bf_matrix_cols(reduced), 21u);
  EXPECT_GT(bf_matrix_cols(reduced), 0u);

  bf_model_free(loaded);
  bf_model_free(model);
  bf_matrix_free(reduced);
  bf_matrix_free(back);
  bf_matrix_free(m);
  bf_flows_free(flows);
}

TEST(CApi, SweepAndReport) {
  TempDir dir;
  bf_synth_options so{3, 0, 900};
  ASSERT_EQ(bf_synth("scenario9", &so, dir.file("s.csv").c_str(), nullptr), BF_OK) << bf_last_error();
  bf_flows* flows = nullptr;
  ASSERT_EQ(bf_flows_read(dir.file("s.csv").c_str(), 1, &flows), BF_OK);
  bf_run_options ro;
  bf_run_options_default(&ro);
  const int64_t widths[] = {60, 90};
  const int64_t strides[] = {30};
  ASSERT_EQ(bf_sweep(flows, widths, 2, strides, 1, &ro, 1, dir.file("sweep.csv").c_str()), BF_OK) << bf_last_error();
  const std::string csv = read_text(dir.file("sweep.csv"));
  EXPECT_EQ(csv.rfind("width_s,stride_s,seed,", 0), 0u);
  ASSERT_EQ(bf_report_histogram(dir.file("sweep.csv").c_str(), "test_precision", 0.05, 0, 1, dir.file("h.csv").c_str()),
            BF_OK);
  EXPECT_EQ(bf_report_histogram(dir.file("sweep.csv").c_str(), "nope", 0.05, 0, 1, dir.file("h.csv").c_str()),
            BF_E_SCHEMA_MISMATCH);
  EXPECT_EQ(bf_repeat(flows, 60, 60, 1, &ro, 1, 0, dir.file("rep.csv").c_str()), BF_E_INVALID_ARGUMENT);
  bf_flows_free(flows);
}
