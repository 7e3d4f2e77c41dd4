"""Decodes the symbols written by qr_dump with OpenCV's QR reader."""
import pathlib
import subprocess
import sys
import tempfile

try:
    import cv2
    import numpy as np
except ImportError:
    print("opencv not available; skipping")
    sys.exit(77)


def load_pbm(path):
    tokens = path.read_text().split()
    assert tokens[0] == "P1"
    width, height = int(tokens[1]), int(tokens[2])
    bits = "".join(tokens[3:])
    img = np.array([255 if b == "0" else 0 for b in bits], dtype=np.uint8)
    return img.reshape(height, width)


def main():
    dump = sys.argv[1]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([dump, tmp], check=True)
        detector = cv2.QRCodeDetector()
        for pbm in sorted(pathlib.Path(tmp).glob("*.pbm")):
            expected = pbm.with_suffix(".txt").read_text()
            img = cv2.resize(load_pbm(pbm), None, fx=8, fy=8, interpolation=cv2.INTER_NEAREST)
            text, _, _ = detector.detectAndDecode(img)
            ok = text == expected
            failures += 0 if ok else 1
            print(f"{pbm.stem}: {'ok' if ok else 'MISMATCH ' + repr(text)}")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
