// Stand-in captioner and judge endpoint for local runs.
#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "capcurate/captioner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mock captioner: POST /caption and /v1/chat/completions"};
  std::string host = "127.0.0.1";
  int port = 8090;
  int latency_ms = 0;
  capcurate::MockCaptionServer::Options o;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  app.add_option("--latency-ms", latency_ms, "Delay before each reply")->capture_default_str();
  app.add_option("--judge-reply", o.judge_reply, "Text returned by the chat endpoint")->capture_default_str();
  app.add_option("--fail-first", o.fail_first, "Answer this many caption requests with 503")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  o.latency = std::chrono::milliseconds(latency_ms);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  try {
    capcurate::MockCaptionServer server(o);
    const int bound = server.start(host, port);
    std::cerr << "mock captioner on http://" << host << ":" << bound << o.caption_path << "\n";
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    std::cerr << "served " << server.requests() << " requests\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
