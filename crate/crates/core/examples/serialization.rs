//! Write a key pair and codewords to disk and read them back.

use prc_lab::io;
use prc_lab::prc;
use prc_lab::PrcParams;

fn main() -> prc_lab::Result<()> {
    let dir = std::env::temp_dir().join("prc-lab-serialization");
    std::fs::create_dir_all(&dir)?;
    let stem = dir.join("demo");
    let params = PrcParams::gim(2048, 3)?;
    let kp = prc::keygen(&params, 21)?;
    io::save_keypair(&stem, &kp, &params, None)?;
    let (pk_path, sk_path) = io::keypair_paths(&stem);
    println!("{}: {} bytes", pk_path.display(), std::fs::metadata(&pk_path)?.len());
    println!("{}: {} bytes", sk_path.display(), std::fs::metadata(&sk_path)?.len());

    let (back, read_params) = io::load_keypair(&stem)?;
    assert_eq!(back.public, kp.public);
    assert_eq!(back.secret, kp.secret);
    assert_eq!(read_params, params);

    let words: Vec<_> = (0..5).map(|i| prc::encode(&kp.public, &params, i).0).collect();
    let cw_path = dir.join("demo.cw");
    io::save_codewords(&cw_path, params.n, &words)?;
    let (n, read) = io::load_codewords(&cw_path)?;
    assert_eq!((n, read), (params.n, words));
    let header = std::fs::read(&pk_path)?;
    let line = header.split(|&b| b == b'\n').next().unwrap_or_default();
    println!("header: {}", String::from_utf8_lossy(line));
    Ok(())
}
