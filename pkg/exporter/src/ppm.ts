/**
 * Minimal netpbm decoding: binary PPM (P6, RGB) and PGM (P5, grayscale).
 *
 * Frames are stored one image per frame as 000001.ppm, 000002.ppm, ... in the
 * frames directory; grayscale images are expanded to RGB on load.
 */
import { readFileSync } from 'node:fs'

export interface Image {
  width: number
  height: number
  /** RGB interleaved, length = width * height * 3 */
  data: Uint8Array
}

function parseHeader(buf: Buffer): { magic: string; fields: number[]; offset: number } {
  // header tokens separated by whitespace; '#' starts a comment to end of line
  const fields: number[] = []
  let magic = ''
  let i = 0
  let token = ''
  const pushToken = () => {
    if (!token) return
    if (!magic) magic = token
    else fields.push(Number(token))
    token = ''
  }
  const needed = () => (magic === 'P6' || magic === 'P5' ? 3 : 3)
  while (i < buf.length && (magic === '' || fields.length < needed())) {
    const ch = buf[i]
    if (ch === 0x23) {
      // comment
      pushToken()
      while (i < buf.length && buf[i] !== 0x0a) i++
    } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
      pushToken()
      i++
      if (magic !== '' && fields.length === needed()) break
    } else {
      token += String.fromCharCode(ch)
      i++
    }
  }
  pushToken()
  return { magic, fields, offset: i }
}

export function decodeNetpbm(buf: Buffer): Image {
  const { magic, fields, offset } = parseHeader(buf)
  if (magic !== 'P6' && magic !== 'P5') {
    throw new Error(`unsupported image magic '${magic}' (need binary PPM/PGM)`)
  }
  const [width, height, maxval] = fields
  if (!Number.isFinite(width) || !Number.isFinite(height) || width <= 0 || height <= 0) {
    throw new Error('bad netpbm dimensions')
  }
  if (maxval !== 255) {
    throw new Error(`only maxval 255 is supported, got ${maxval}`)
  }
  const channels = magic === 'P6' ? 3 : 1
  const expected = width * height * channels
  const pixels = buf.subarray(offset, offset + expected)
  if (pixels.length < expected) {
    throw new Error(`truncated image: expected ${expected} pixel bytes, got ${pixels.length}`)
  }
  if (channels === 3) {
    return { width, height, data: new Uint8Array(pixels) }
  }
  const rgb = new Uint8Array(width * height * 3)
  for (let p = 0; p < width * height; p++) {
    rgb[3 * p] = rgb[3 * p + 1] = rgb[3 * p + 2] = pixels[p]
  }
  return { width, height, data: rgb }
}

export function loadImage(path: string): Image {
  return decodeNetpbm(readFileSync(path))
}

export function encodePpm(img: Image): Buffer {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, 'ascii')
  return Buffer.concat([header, Buffer.from(img.data)])
}
