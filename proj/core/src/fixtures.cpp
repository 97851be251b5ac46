// Copyright 2026 The Lineage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lineage/fixtures.hpp"

namespace lineage {

const std::vector<FixtureProgram>& fixture_programs() {
  static const std::vector<FixtureProgram> kPrograms = {
      {"direct-use-of-jinja2",
       R"py(import jinja2

def render_greeting(name):
    template = jinja2.Template("Hello " + name)
    return template

def banner(title):
    line = "=" * len(title)
    return line + title + line
)py",
       R"py(def test_render():
    assert render_greeting("ada") == "tpl:Hello ada"

def test_banner():
    assert banner("ab") == "==ab=="
)py",
       {"jinja2.Template", 2, "server-side-template-injection"}},

      {"user-exec-format-string",
       R"py(def run_user_snippet(expression):
    statement = "print({})".format(expression)
    exec(statement)
    return len(statement)

def describe(values):
    parts = []
    for v in values:
        parts.append(str(v))
    return ", ".join(parts)
)py",
       R"py(def test_snippet():
    assert run_user_snippet("1 + 2") == 12

def test_describe():
    assert describe([1, 2, 3]) == "1, 2, 3"
)py",
       {"exec(", 1, "code-injection"}},

      {"avoid-pickle",
       R"py(import pickle

def load_session(blob):
    session = pickle.loads(blob)
    if session == "":
        return "empty"
    return session

def session_size(blob):
    return len(load_session(blob))
)py",
       R"py(def test_load():
    assert load_session("abc") == "obj:abc"

def test_size():
    assert session_size("ab") == 6
)py",
       {"pickle.loads", 1, "unsafe-deserialization"}},

      {"unsanitized-input-in-response",
       R"py(def respond(user):
    body = "<p>" + user + "</p>"
    return body

def status(code):
    if code == 200:
        return "ok"
    return "error"
)py",
       R"py(def test_respond():
    assert respond("bob") == "<p>bob</p>"

def test_status():
    assert status(200) == "ok"
    assert status(500) == "error"
)py",
       {"\"<p>\"", 3, "cross-site-scripting"}},

      {"path-traversal-join",
       R"py(import os

def resolve(filename):
    base = "/var/data"
    return os.path.join(base, filename)

def extension(filename):
    parts = filename.split(".")
    return parts[-1]
)py",
       R"py(def test_resolve():
    assert resolve("a.txt") == "/var/data/a.txt"

def test_extension():
    assert extension("a.tar.gz") == "gz"
)py",
       {"os.path.join", 1, "path-traversal"}},

      {"disabled-cert-validation",
       R"py(import ssl

def make_context(host):
    context = ssl._create_unverified_context()
    return context + "@" + host
)py",
       R"py(def test_context():
    assert make_context("example.org") == "ctx:unverified@example.org"
)py",
       {"ssl._create_unverified_context", 4, "improper-certificate-validation"}},

      {"flask-wtf-csrf-disabled",
       R"py(def app_settings(secret):
    settings = {"SECRET_KEY": secret, "WTF_CSRF_ENABLED": False}
    return settings

def is_protected(settings):
    return settings.get("WTF_CSRF_ENABLED", True)
)py",
       R"py(def test_settings():
    s = app_settings("k")
    assert s["SECRET_KEY"] == "k"
    assert not is_protected(s)
)py",
       {"\"WTF_CSRF_ENABLED\": False", 3, "csrf-protection-disabled"}},

      {"insufficient-dsa-key-size",
       R"py(import dsa

def make_key(owner):
    key = dsa.generate(1024)
    return owner + ":" + key
)py",
       R"py(def test_key():
    assert make_key("ops") == "ops:dsa:1024"
)py",
       {"dsa.generate", 3, "weak-cryptographic-key"}},

      {"debug-enabled",
       R"py(import flask

def serve(port):
    config = {"debug": True, "port": port}
    total = 0
    while total < 3:
        total += 1
    return flask.run(config["port"] + total)
)py",
       R"py(def test_serve():
    assert serve(8000) == "serving:8003"
)py",
       {"\"debug\": True", 2, "debug-mode-enabled"}},

      {"pyramid-csrf-check-disabled",
       R"py(def configure(settings):
    settings["pyramid.require_default_csrf"] = False
    return settings

def setting_count(settings):
    count = 0
    for key in settings:
        count += 1
    return count
)py",
       R"py(def test_configure():
    s = configure({})
    assert s == {"pyramid.require_default_csrf": False}
    assert setting_count(s) == 1
)py",
       {"\"pyramid.require_default_csrf\"", 2, "csrf-protection-disabled"}},

      {"avoid-bind-to-all-interfaces",
       R"py(import socket

def listen(port):
    address = "0.0.0.0"
    return socket.bind(address, port)
)py",
       R"py(def test_listen():
    assert listen(8080) == "bound:0.0.0.0,8080"
)py",
       {"\"0.0.0.0\"", 4, "bind-to-all-interfaces"}},

      {"ssl-wrap-socket-is-deprecated",
       R"py(import ssl

def secure(sock):
    wrapped = ssl.wrap_socket(sock)
    if wrapped.startswith("wrapped:"):
        return wrapped
    return "plain"
)py",
       R"py(def test_secure():
    assert secure("s1") == "wrapped:s1"
)py",
       {"ssl.wrap_socket", 4, "deprecated-tls-api"}},

      {"paramiko-implicit-trust-host-key",
       R"py(import paramiko

def host_policy(client):
    policy = paramiko.AutoAddPolicy()
    return client + ":" + policy

def clients(names):
    out = []
    for n in names:
        out.append(host_policy(n))
    return out
)py",
       R"py(def test_policy():
    assert host_policy("c") == "c:policy:auto"
    assert len(clients(["a", "b"])) == 2
)py",
       {"paramiko.AutoAddPolicy", 2, "missing-host-key-verification"}},

      {"regex_dos",
       R"py(import re

def validator(text):
    pattern = re.compile("(a+)+$")
    return pattern + "|" + text
)py",
       R"py(def test_validator():
    assert validator("aaa") == "re:(a+)+$|aaa"
)py",
       {"\"(a+)+$\"", 2, "regular-expression-denial-of-service"}},

      {"insecure-hash-algorithm-md5",
       R"py(import hashlib

def fingerprint(data):
    digest = hashlib.md5(data)
    return digest

def short_fingerprint(data):
    full = fingerprint(data)
    return full[0] + full[1] + full[2]
)py",
       R"py(def test_fingerprint():
    assert fingerprint("x") == "md5:x"
    assert short_fingerprint("x") == "md5"
)py",
       {"hashlib.md5", 4, "weak-hash"}},
  };
  return kPrograms;
}

const FixtureProgram* find_fixture(std::string_view label) {
  for (const auto& f : fixture_programs()) {
    if (f.label == label) return &f;
  }
  return nullptr;
}

}  // namespace lineage
