export interface Hit {
  page_id: number;
  title_id: string;
  x: number;
  y: number;
  side: number;
  distance: number;
  thumbnail_url: string;
  page_url: string;
}

export interface QueryResponse {
  hits: Hit[];
  elapsed_ms: number;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** 8-bit grayscale pixels, row-major, 255 = white. */
export interface GrayBitmap {
  width: number;
  height: number;
  data: Uint8Array;
}
