// Playback over a finished (or progressing) run.  Frames are pure server
// responses, so start/pause/slow-motion/step/step-back are nothing more than
// cursor moves plus a cache; stepping back and forward replays identical
// frames by construction.

import { FrameResponse } from "./api.js";

export type FrameFetcher = (step: number) => Promise<FrameResponse>;

export class PlaybackCursor {
  private cache = new Map<number, FrameResponse>();
  private timer: ReturnType<typeof setInterval> | null = null;
  step = -1;

  constructor(
    private fetchFrame: FrameFetcher,
    public numSteps: number,
    private cacheLimit = 64,
  ) {}

  private remember(frame: FrameResponse): FrameResponse {
    this.cache.set(frame.step, frame);
    if (this.cache.size > this.cacheLimit) {
      const oldest = this.cache.keys().next().value as number;
      this.cache.delete(oldest);
    }
    return frame;
  }

  async seek(step: number): Promise<FrameResponse> {
    if (step < 0 || step >= this.numSteps) {
      throw new RangeError(`step ${step} outside 0..${this.numSteps - 1}`);
    }
    this.step = step;
    const cached = this.cache.get(step);
    if (cached) return cached;
    return this.remember(await this.fetchFrame(step));
  }

  async stepForward(): Promise<FrameResponse> {
    return this.seek(Math.min(this.step + 1, this.numSteps - 1));
  }

  async stepBack(): Promise<FrameResponse> {
    return this.seek(Math.max(this.step - 1, 0));
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  play(onFrame: (frame: FrameResponse) => void, intervalMs = 100): void {
    this.pause();
    this.timer = setInterval(async () => {
      if (this.step + 1 >= this.numSteps) {
        this.pause();
        return;
      }
      onFrame(await this.stepForward());
    }, intervalMs);
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
