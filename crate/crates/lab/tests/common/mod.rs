use std::path::Path;

use ftp_lab::data::{encode_idx_images, encode_idx_labels};

/// Writes `root/mnist` with 28×28 images whose bright row band encodes the
/// label, so a small network separates the classes within a few epochs.
pub fn synthetic_mnist(root: &Path, train: usize, test: usize) {
    let dir = root.join("mnist");
    std::fs::create_dir_all(&dir).unwrap();
    let make = |n: usize, offset: usize| {
        let mut pixels = vec![0u8; n * 784];
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i + offset) % 10;
            labels.push(label as u8);
            for r in 0..28 {
                for c in 0..28 {
                    let band = r / 3 == label;
                    let jitter = ((i * 31 + r * 7 + c * 13) % 50) as u8;
                    pixels[i * 784 + r * 28 + c] = if band { 200 + jitter } else { jitter };
                }
            }
        }
        (pixels, labels)
    };
    for (prefix, n, offset) in [("train", train, 0), ("t10k", test, 3)] {
        let (p, l) = make(n, offset);
        std::fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), encode_idx_images(28, 28, &p)).unwrap();
        std::fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), encode_idx_labels(&l)).unwrap();
    }
}
