#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use pairmps::session::{WarrantTemplate, DEFAULT_NOW};

pub const PASSPHRASE: &str = "correct horse";

/// One keystore and working directory driven through separate `pairmps` processes.
pub struct Flow {
    pub dir: tempfile::TempDir,
    pub scheme: &'static str,
    pub backend: &'static str,
}

impl Flow {
    pub fn new(scheme: &'static str, backend: &'static str) -> Self {
        Flow {
            dir: tempfile::tempdir().unwrap(),
            scheme,
            backend,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    pub fn command(&self) -> Command {
        self.command_at(DEFAULT_NOW)
    }

    pub fn command_at(&self, now: u64) -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pairmps"));
        cmd.current_dir(self.dir.path())
            .env("PAIRMPS_PASSPHRASE", PASSPHRASE)
            .args(["--scheme", self.scheme, "--backend", self.backend])
            .args(["--keystore", "ks", "--warrant", "w.env"])
            .args(["--now", &now.to_string()]);
        cmd
    }

    pub fn run(&self, args: &[&str]) -> Output {
        self.command().args(args).output().unwrap()
    }

    /// Runs a command that must succeed and returns its stdout.
    pub fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "pairmps {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    /// Exit code and stderr of a command expected to fail.
    pub fn fails(&self, args: &[&str]) -> (i32, String) {
        let out = self.run(args);
        (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
    }

    /// Keys, warrant, delegation and proxy keys for the standard `n`-by-`l` template.
    pub fn prepare(&self, n: usize, l: usize, seed: u64) -> WarrantTemplate {
        let t = WarrantTemplate::standard(n, l);
        let seed = seed.to_string();
        let lx = self.scheme == "liuxiao";
        if !lx {
            self.ok(&["setup", "--seed", &seed]);
        }
        for id in t.originals.iter().chain(&t.proxies).chain([&t.receiver]) {
            let id = id.as_str();
            self.ok(&["extract", "--seed", &seed, "--id", id, "--out", &pubkey_file(id)]);
        }
        let mut args = vec!["warrant".to_string(), "--seed".into(), seed.clone()];
        for a in &t.originals {
            args.extend(["--original".into(), a.as_str().to_string()]);
        }
        for p in &t.proxies {
            args.extend(["--proxy".into(), p.as_str().to_string()]);
        }
        args.extend(["--out".into(), "w.env".into()]);
        self.ok(&args.iter().map(String::as_str).collect::<Vec<_>>());

        let mut shares = Vec::new();
        for (i, a) in t.originals.iter().enumerate() {
            let f = format!("d{i}.env");
            self.ok(&["delegate", "--id", a.as_str(), "--out", &f]);
            shares.extend(["--share".to_string(), f]);
            if lx {
                shares.extend(["--pubkey".to_string(), pubkey_file(a.as_str())]);
            }
        }
        for (j, p) in t.proxies.iter().enumerate() {
            let mut args = vec!["proxy-key".to_string(), "--id".into(), p.as_str().into()];
            args.extend(shares.iter().cloned());
            args.extend(["--out".into(), format!("pk{j}.env")]);
            self.ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
        }
        t
    }

    /// Round 1 for every proxy, then the common commitment on `message`.
    pub fn round1_and_commit(&self, t: &WarrantTemplate, seed: Option<u64>, message: &[u8]) {
        let seed = seed.map(|s| s.to_string());
        let receiver_pub = pubkey_file(t.receiver.as_str());
        let mut commit = vec!["commit".to_string()];
        for (j, p) in t.proxies.iter().enumerate() {
            let f = format!("r{j}.env");
            let mut args = vec!["round1", "--id", p.as_str(), "--out", &f];
            if self.scheme == "liuxiao" {
                args.extend(["--receiver-pubkey", &receiver_pub]);
            } else {
                args.extend(["--receiver", t.receiver.as_str()]);
            }
            if let Some(s) = &seed {
                args.extend(["--seed", s]);
            }
            self.ok(&args);
            commit.extend(["--r1".to_string(), f]);
        }
        std::fs::write(self.path("m.bin"), message).unwrap();
        commit.extend(["--message".into(), "m.bin".into(), "--out".into(), "cm.env".into()]);
        self.ok(&commit.iter().map(String::as_str).collect::<Vec<_>>());
    }

    pub fn partials(&self, t: &WarrantTemplate) {
        for (j, p) in t.proxies.iter().enumerate() {
            self.ok(&["partial", "--id", p.as_str(), "--commit", "cm.env", "--out", &format!("u{j}.env")]);
        }
    }

    /// Arguments for `combine` over the given proxies' partials.
    pub fn combine_args(&self, t: &WarrantTemplate, proxies: &[usize], out: &str) -> Vec<String> {
        let mut args = vec!["combine".to_string(), "--proxy-key".into(), "pk0.env".into()];
        if self.scheme != "liuxiao" {
            for j in 0..t.proxies.len() {
                args.extend(["--r1".into(), format!("r{j}.env")]);
            }
        }
        for j in proxies {
            args.extend(["--partial".into(), format!("u{j}.env")]);
        }
        args.extend(["--commit".into(), "cm.env".into(), "--out".into(), out.into()]);
        args
    }

    /// The whole protocol; returns the signcryption file name.
    pub fn session(&self, n: usize, l: usize, seed: u64, message: &[u8]) -> (WarrantTemplate, &'static str) {
        let t = self.prepare(n, l, seed);
        self.round1_and_commit(&t, Some(seed), message);
        self.partials(&t);
        let all: Vec<usize> = (0..l).collect();
        let args = self.combine_args(&t, &all, "sc.env");
        self.ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
        (t, "sc.env")
    }

    pub fn proxy_pubkey_args(&self, t: &WarrantTemplate) -> Vec<String> {
        t.proxies
            .iter()
            .flat_map(|p| ["--pubkey".to_string(), pubkey_file(p.as_str())])
            .collect()
    }
}

pub fn pubkey_file(id: &str) -> String {
    format!("{}.pub", id.replace('@', "_"))
}
