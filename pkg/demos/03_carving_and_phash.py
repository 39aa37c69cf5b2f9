# coding: utf-8

# # Carved images: perceptual hashes and byte similarity
#
# A carved file counts only if it decodes, is the closest image to some
# ground-truth picture, and shares enough aligned 512-byte chunks with it.

# In[1]:

import io

import numpy as np
from PIL import Image

from dfbench.scorers.carving import CarvedFile, GroundTruthImage, byte_similarity, is_decodable, score_carving
from dfbench.scorers.phash import hamming, phash
from dfbench.synthetic import encode_image, synthetic_image

rng = np.random.default_rng(7)
original = synthetic_image(rng, size=64)
png = encode_image(original, "png")


# The hash tolerates re-encoding: a JPEG copy stays within a few bits.

# In[2]:

buf = io.BytesIO()
original.save(buf, format="JPEG", quality=60)
jpeg = buf.getvalue()
other = encode_image(synthetic_image(np.random.default_rng(8), size=64), "png")

print("jpeg vs png :", hamming(phash(png), phash(jpeg)))
print("other vs png:", hamming(phash(png), phash(other)))


# ## Byte similarity
#
# Uncompressed BMP makes the chunk arithmetic easy to see. Keep the first two
# of ten chunks intact and corrupt the rest.

# In[3]:

pixels = np.random.default_rng(1).integers(0, 256, size=(40, 40, 3), dtype=np.uint8)
out = io.BytesIO()
Image.fromarray(pixels).save(out, format="BMP")
bmp = out.getvalue()

damaged = bmp[:1024] + bytes(b ^ 0xFF for b in bmp[1024:])
print(len(bmp), "bytes,", byte_similarity(damaged, bmp), "similar, decodable:", is_decodable(damaged))


# Exactly at the 0.20 threshold the carve is a hit; with one chunk fewer it
# is a miss on both sides.

# In[4]:

gt = [GroundTruthImage("gt.bmp", bmp, "bmp")]
print(score_carving(gt, [CarvedFile("a.bmp", damaged, "bmp")])[0])
worse = bmp[:512] + bytes(b ^ 0xFF for b in bmp[512:])
print(score_carving(gt, [CarvedFile("b.bmp", worse, "bmp")])[0])
