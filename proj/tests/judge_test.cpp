#include <gtest/gtest.h>

#include <random>

#include "capcurate/captioner.hpp"
#include "capcurate/judge.hpp"

using namespace capcurate;

namespace {
const std::vector<std::string> kRefs = {"a red barn under a blue sky"};
}

TEST(ParseJudgeScore, RecognisedForms) {
  auto p = parse_judge_score("score: 4/5");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->raw, 4);
  EXPECT_EQ(p->scale, 5);
  p = parse_judge_score("I'd give it 7 / 10 overall.");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->scale, 10);
  p = parse_judge_score("Score: 3.5");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->scale, 5);
  p = parse_judge_score("Score = 72. Mostly accurate.");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->raw, 72);
  EXPECT_EQ(p->scale, 100);
  p = parse_judge_score("  4\nThe caption is good.");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->raw, 4);
}

TEST(ParseJudgeScore, RejectsProseAndOutOfRange) {
  EXPECT_FALSE(parse_judge_score("The caption is quite detailed."));
  EXPECT_FALSE(parse_judge_score("score: 140"));
  EXPECT_FALSE(parse_judge_score(""));
}

TEST(RescaleScore, AffineAndOrderPreserving) {
  EXPECT_DOUBLE_EQ(rescale_score(4, 5), 80.0);
  EXPECT_DOUBLE_EQ(rescale_score(0, 5), 0.0);
  EXPECT_DOUBLE_EQ(rescale_score(5, 5), 100.0);
  EXPECT_DOUBLE_EQ(rescale_score(61.5, 100), 61.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(a < b, rescale_score(a, 10) < rescale_score(b, 10));
    EXPECT_GE(rescale_score(a, 10), 0.0);
    EXPECT_LE(rescale_score(a, 10), 100.0);
  }
}

TEST(RenderJudgePrompt, ContainsCandidateAndReferences) {
  const auto p = render_judge_prompt("a barn", kRefs);
  EXPECT_NE(p.find("a barn"), std::string::npos);
  EXPECT_NE(p.find(kRefs[0]), std::string::npos);
  EXPECT_NE(p.find("precision"), std::string::npos);
  EXPECT_THROW(render_judge_prompt("x", kRefs, "other"), Error);
}

TEST(JudgeCaption, FixedReplyRescales) {
  MockJudge judge("score: 4/5");
  const auto s = judge_caption("a barn", kRefs, judge);
  EXPECT_DOUBLE_EQ(s.rescaled, 80.0);
  EXPECT_EQ(s.attempts, 1);
  EXPECT_EQ(s.rationale_text, "score: 4/5");
}

TEST(JudgeCaption, RetriesUntilParseable) {
  MockJudge judge([](const std::string&, int call) { return call < 3 ? std::string("hmm") : "Score: 2/5"; });
  const auto s = judge_caption("a barn", kRefs, judge);
  EXPECT_EQ(s.attempts, 3);
  EXPECT_DOUBLE_EQ(s.rescaled, 40.0);
}

TEST(JudgeCaption, UnparseableAfterThreeAttempts) {
  MockJudge judge("The caption mentions the barn but not the sky.");
  try {
    judge_caption("a barn", kRefs, judge);
    FAIL();
  } catch (const UnparseableReply& e) {
    EXPECT_EQ(e.code(), ErrorCode::unparseable);
    ASSERT_EQ(e.replies().size(), 3u);
    EXPECT_EQ(e.replies()[0], "The caption mentions the barn but not the sky.");
  }
  EXPECT_EQ(judge.calls(), 3);
}

TEST(JudgeCaption, NeedsAReference) {
  MockJudge judge("score: 4/5");
  EXPECT_THROW(judge_caption("a barn", std::vector<std::string>{}, judge), Error);
}

TEST(JudgeCaption, TransportErrorIsTyped) {
  HttpJudgeClient judge("http://127.0.0.1:1/v1/chat/completions", "m", std::chrono::milliseconds(500));
  try {
    judge_caption("a barn", kRefs, judge);
    FAIL();
  } catch (const UnparseableReply&) {
    FAIL() << "transport failure reported as unparseable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::transport);
  }
}

TEST(JudgeCaption, OverHttpAgainstMockServer) {
  MockCaptionServer::Options o;
  o.judge_reply = "Score: 3/5. Misses the sky.";
  MockCaptionServer server(o);
  const int port = server.start();
  auto judge = make_judge("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "judge-x");
  const auto s = judge_caption("a barn", kRefs, *judge);
  EXPECT_DOUBLE_EQ(s.rescaled, 60.0);
  server.stop();
}

TEST(MakeJudge, MockScheme) {
  auto judge = make_judge("mock://?reply=score%3A%205%2F5", "m");
  EXPECT_DOUBLE_EQ(judge_caption("x", kRefs, *judge).rescaled, 100.0);
}

TEST(JudgeBatch, KeepsOrderAndReportsErrors) {
  std::vector<JudgeItem> items;
  for (int i = 0; i < 12; ++i) items.push_back({"i" + std::to_string(i), i % 4 == 0 ? "bad" : "good", kRefs});
  items.push_back({"noref", "good", {}});
  JudgeBatchOptions opts;
  opts.parallelism = 3;
  opts.rate_limit = 1000;
  const auto results = judge_batch(
      items,
      [] {
        return std::make_unique<MockJudge>([](const std::string& prompt, int) {
          return prompt.find("Candidate: bad") != std::string::npos ? std::string("no idea") : "Score: 5/5";
        });
      },
      opts);
  ASSERT_EQ(results.size(), items.size());
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(results[i].id, items[i].id);
    EXPECT_EQ(results[i].score.has_value(), i % 4 != 0) << i;
    if (!results[i].score) EXPECT_FALSE(results[i].error.empty());
  }
  EXPECT_FALSE(results.back().score);
}
